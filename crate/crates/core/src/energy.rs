//! Nonlocal double-integral energies of grid maps and the constructive
//! asymptotic mean.
//!
//! Everything here exploits the piecewise-constant-with-constant-tail model:
//! pairs with both points outside the window contribute nothing, pairs with
//! one point outside see the constant tail, so the outside factor reduces to
//! the measure of a ball minus the sampled measure of its window part. The
//! only quadrature error left is the cutoff shell, controlled by the
//! supersampling factor.

use crate::error::{Error, Result};
use crate::grid::{GridMap, IndexBox};
use crate::manifold::Point;
use crate::num::{par_sum, serde_extended_f64, CompensatedSum, Norm};
use serde::{Deserialize, Serialize};

/// Quadrature rule for the pairwise sums: plain midpoint on cell centers,
/// or each cell subdivided s^d times with midpoint sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    Midpoint,
    Supersampled(u32),
}

impl Quadrature {
    #[inline]
    pub fn s(&self) -> u32 {
        match self {
            Quadrature::Midpoint => 1,
            Quadrature::Supersampled(s) => (*s).max(1),
        }
    }

    pub fn from_factor(s: u32) -> Self {
        if s <= 1 {
            Quadrature::Midpoint
        } else {
            Quadrature::Supersampled(s)
        }
    }
}

/// A nonnegative energy; +infinity is an explicit sentinel, not an error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyValue {
    #[serde(with = "serde_extended_f64")]
    pub value: f64,
    pub quadrature: Quadrature,
}

impl EnergyValue {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// integral over R^d of dist_N(u(x), b) dx. Infinite as soon as the tail
/// differs from b, since the mismatch persists on an unbounded set.
pub fn integral_dist_to_point(u: &GridMap, b: &Point) -> Result<EnergyValue> {
    u.manifold().check_on(b.coords())?;
    let m = u.manifold();
    if m.dist_slice(u.tail(), b.coords()) > 0.0 {
        return Ok(EnergyValue { value: f64::INFINITY, quadrature: Quadrature::Midpoint });
    }
    let w = u.cell_volume();
    let value = par_sum(u.cell_count(), |i| w * m.dist_slice(u.value(i), b.coords()));
    Ok(EnergyValue { value, quadrature: Quadrature::Midpoint })
}

/// integral over R^d of dist_N(u0(x), u1(x)) dx for two maps on compatible
/// lattices. Infinite when the tails differ.
pub fn pointwise_l1_distance(u0: &GridMap, u1: &GridMap) -> Result<EnergyValue> {
    if !u0.same_geometry(u1) {
        return Err(Error::domain(
            "pointwise distance needs maps on the same lattice (d, h, manifold, aligned origins)",
        ));
    }
    let m = u0.manifold();
    if m.dist_slice(u0.tail(), u1.tail()) > 0.0 {
        return Ok(EnergyValue { value: f64::INFINITY, quadrature: Quadrature::Midpoint });
    }
    // union of the two windows in u0's cell coordinates
    let h = u0.h();
    let d = u0.dim();
    let mut lo = vec![0i64; d];
    let mut hi: Vec<i64> = u0.counts().iter().map(|&c| c as i64).collect();
    for a in 0..d {
        let shift = ((u1.origin()[a] - u0.origin()[a]) / h).round() as i64;
        lo[a] = lo[a].min(shift);
        hi[a] = hi[a].max(shift + u1.counts()[a] as i64);
    }
    let cells = IndexBox::new(lo, hi);
    let w = u0.cell_volume();
    let value = par_sum(cells.count(), |f| {
        let idx = cells.unflatten(f);
        let x: Vec<f64> = (0..d)
            .map(|a| u0.origin()[a] + (idx[a] as f64 + 0.5) * h)
            .collect();
        w * m.dist_slice(u0.value_at(&x), u1.value_at(&x))
    });
    Ok(EnergyValue { value, quadrature: Quadrature::Midpoint })
}

/// Full double integral over window x window (ordered pairs, no cutoff):
/// the quantity that must blow up with the window for non-constant maps.
pub fn full_window_double_integral(u: &GridMap) -> f64 {
    let m = u.manifold();
    let n = u.cell_count();
    let w2 = u.cell_volume() * u.cell_volume();
    par_sum(n, |i| {
        let vi = u.value(i);
        let mut acc = CompensatedSum::new();
        for j in (i + 1)..n {
            acc.add(m.dist_slice(vi, u.value(j)));
        }
        2.0 * w2 * acc.value()
    })
}

/// Pair weight cache: for each cell-offset vector dj, the quadrature measure
/// of subsample pairs (p, q) with q in cell i+dj, p in cell i, that satisfy
/// the cutoff. Depends only on dj.
struct OffsetWeights {
    offsets: Vec<Vec<i64>>,
    omega: Vec<f64>,
}

fn build_offset_weights(d: usize, h: f64, s: u32, r: f64, norm: Norm) -> OffsetWeights {
    let s = s as i64;
    let step = h / s as f64;
    let k = (r / h).ceil() as i64 + 1;
    let cell_box = IndexBox::new(vec![-k; d], vec![k + 1; d]);
    let delta_box = IndexBox::new(vec![-(s - 1); d], vec![s; d]);
    let w2 = step.powi(d as i32) * step.powi(d as i32);
    let mut offsets = Vec::new();
    let mut omega = Vec::new();
    let mut diff = vec![0.0f64; d];
    for dj in cell_box.iter() {
        let mut count = 0.0f64;
        for delta in delta_box.iter() {
            for a in 0..d {
                diff[a] = dj[a] as f64 * h + delta[a] as f64 * step;
            }
            if norm.len(&diff) <= r {
                // number of (sigma, tau) subsample pairs with tau - sigma = delta
                let mult: f64 = delta.iter().map(|&e| (s - e.abs()) as f64).product();
                count += mult;
            }
        }
        if count > 0.0 {
            offsets.push(dj);
            omega.push(w2 * count);
        }
    }
    OffsetWeights { offsets, omega }
}

/// Sigma-resolved one-sided weights: quadrature measure contributed by the
/// cell at offset dj to the ball around subsample sigma of the base cell.
struct BallWeights {
    offsets: Vec<Vec<i64>>,
    /// weight[offset][sigma_flat]
    weight: Vec<Vec<f64>>,
}

fn build_ball_weights(d: usize, h: f64, s: u32, r: f64, norm: Norm) -> BallWeights {
    let s = s as i64;
    let step = h / s as f64;
    let k = (r / h).ceil() as i64 + 1;
    let cell_box = IndexBox::new(vec![-k; d], vec![k + 1; d]);
    let sub_box = IndexBox::new(vec![0; d], vec![s; d]);
    let w = step.powi(d as i32);
    let subs: Vec<Vec<i64>> = sub_box.iter().collect();
    let mut offsets = Vec::new();
    let mut weight = Vec::new();
    let mut diff = vec![0.0f64; d];
    for dj in cell_box.iter() {
        let mut per_sigma = vec![0.0f64; subs.len()];
        let mut any = false;
        for (si, sigma) in subs.iter().enumerate() {
            let mut acc = 0.0f64;
            for tau in subs.iter() {
                for a in 0..d {
                    diff[a] = dj[a] as f64 * h + (tau[a] - sigma[a]) as f64 * step;
                }
                if norm.len(&diff) <= r {
                    acc += w;
                }
            }
            per_sigma[si] = acc;
            any |= acc > 0.0;
        }
        if any {
            offsets.push(dj);
            weight.push(per_sigma);
        }
    }
    BallWeights { offsets, weight }
}

/// Unnormalized nonlocal energy: the double integral over ordered pairs
/// (x, y) with |x - y| <= R in the chosen norm of dist_N(u(x), u(y)).
pub fn nonlocal_energy(u: &GridMap, r: f64, norm: Norm, quad: Quadrature) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("cutoff radius must be positive, got {r}")));
    }
    let m = u.manifold();
    let d = u.dim();
    let n = u.cell_count();
    let ball = norm.ball_volume(d, r);

    // Far field: every sample pair is within the cutoff and the window part
    // of every ball is the whole window, both exactly.
    if r >= u.window_diameter(norm) {
        let in_in = full_window_double_integral(u);
        let w = u.cell_volume();
        let window = u.window_volume();
        let to_tail = par_sum(n, |i| w * m.dist_slice(u.value(i), u.tail()));
        return Ok(in_in + 2.0 * to_tail * (ball - window));
    }

    let s = quad.s();
    let pair = build_offset_weights(d, u.h(), s, r, norm);
    let counts: Vec<i64> = u.counts().iter().map(|&c| c as i64).collect();
    let strides = {
        let mut st = vec![1i64; d];
        for a in (0..d.saturating_sub(1)).rev() {
            st[a] = st[a + 1] * counts[a + 1];
        }
        st
    };

    let in_in = par_sum(n, |i| {
        let idx = u.unflatten(i);
        let vi = u.value(i);
        let mut acc = CompensatedSum::new();
        'offsets: for (oi, dj) in pair.offsets.iter().enumerate() {
            let mut j = 0i64;
            for a in 0..d {
                let ja = idx[a] as i64 + dj[a];
                if ja < 0 || ja >= counts[a] {
                    continue 'offsets;
                }
                j += ja * strides[a];
            }
            let dist = m.dist_slice(vi, u.value(j as usize));
            if dist > 0.0 {
                acc.add(dist * pair.omega[oi]);
            }
        }
        acc.value()
    });

    // One-inside/one-outside pairs: the outside factor is the sampled
    // measure of the dilated-window lattice points beyond the window and
    // within the cutoff, consistent with the indicator quadrature above.
    let vw = build_ball_weights(d, u.h(), s, r, norm);
    let step_vol = (u.h() / s as f64).powi(d as i32);
    let sub_count = (s as usize).pow(d as u32);
    let in_out = par_sum(n, |i| {
        let dist_tail = m.dist_slice(u.value(i), u.tail());
        if dist_tail == 0.0 {
            return 0.0;
        }
        let idx = u.unflatten(i);
        let mut acc = CompensatedSum::new();
        for sigma in 0..sub_count {
            // sampled measure of B(p_sigma, r) minus its window part
            let mut v_out = CompensatedSum::new();
            for (oi, dj) in vw.offsets.iter().enumerate() {
                let outside = (0..d).any(|a| {
                    let ja = idx[a] as i64 + dj[a];
                    ja < 0 || ja >= counts[a]
                });
                if outside {
                    v_out.add(vw.weight[oi][sigma]);
                }
            }
            acc.add(dist_tail * step_vol * v_out.value());
        }
        acc.value()
    });

    Ok(in_in + 2.0 * in_out)
}

/// Normalized nonlocal energy Theta(R): the cutoff double integral divided
/// by the measure of the radius-R ball of the chosen norm.
pub fn theta(u: &GridMap, r: f64, norm: Norm, quad: Quadrature) -> Result<EnergyValue> {
    let e = nonlocal_energy(u, r, norm, quad)?;
    Ok(EnergyValue { value: e / norm.ball_volume(u.dim(), r), quadrature: quad })
}

/// integral over R^d of dist_N(u(x), u(x + shift)) dx, sampled at cell
/// midpoints over the union of the window and its back-shifted copy.
pub fn translation_energy(u: &GridMap, shift: &[f64], quad: Quadrature) -> Result<EnergyValue> {
    if shift.len() != u.dim() {
        return Err(Error::domain(format!(
            "shift has {} coordinates, map dimension is {}",
            shift.len(),
            u.dim()
        )));
    }
    let d = u.dim();
    let h = u.h();
    let m = u.manifold();
    let mut lo = vec![0i64; d];
    let mut hi: Vec<i64> = u.counts().iter().map(|&c| c as i64).collect();
    for a in 0..d {
        let t = -shift[a] / h;
        lo[a] = lo[a].min(t.floor() as i64);
        hi[a] = hi[a].max((u.counts()[a] as f64 + t).ceil() as i64);
    }
    let cells = IndexBox::new(lo, hi);
    let s = quad.s() as i64;
    let step = h / s as f64;
    let sub_box = IndexBox::new(vec![0; d], vec![s; d]);
    let subs: Vec<Vec<i64>> = sub_box.iter().collect();
    let w = step.powi(d as i32);
    let value = par_sum(cells.count(), |f| {
        let idx = cells.unflatten(f);
        let mut acc = CompensatedSum::new();
        let mut p = vec![0.0f64; d];
        let mut q = vec![0.0f64; d];
        for sigma in &subs {
            for a in 0..d {
                p[a] = u.origin()[a] + idx[a] as f64 * h + (sigma[a] as f64 + 0.5) * step;
                q[a] = p[a] + shift[a];
            }
            let dist = m.dist_slice(u.value_at(&p), u.value_at(&q));
            if dist > 0.0 {
                acc.add(w * dist);
            }
        }
        acc.value()
    });
    Ok(EnergyValue { value, quadrature: quad })
}

/// Average of the translation energy over shifts |shift|_inf <= rho, the
/// quantity thresholded when selecting dyadic levels. The shift box is
/// sampled with `shift_samples` midpoints per axis.
pub fn averaged_translation(
    u: &GridMap,
    rho: f64,
    shift_samples: usize,
    quad: Quadrature,
) -> Result<EnergyValue> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!("shift radius must be positive, got {rho}")));
    }
    if shift_samples == 0 {
        return Err(Error::domain("need at least one shift sample per axis"));
    }
    let d = u.dim();
    let mgrid = IndexBox::new(vec![0; d], vec![shift_samples as i64; d]);
    let step = 2.0 * rho / shift_samples as f64;
    let mut acc = CompensatedSum::new();
    for j in mgrid.iter() {
        let shift: Vec<f64> = (0..d).map(|a| -rho + (j[a] as f64 + 0.5) * step).collect();
        acc.add(translation_energy(u, &shift, quad)?.value);
    }
    let value = acc.value() / (shift_samples as f64).powi(d as i32);
    Ok(EnergyValue { value, quadrature: quad })
}

/// Theta(r) along a decreasing schedule of radii, all at least 2h: below
/// that the discrete map is constant at the pair scale and the value
/// degenerates.
pub fn small_r_sweep(
    u: &GridMap,
    rs: &[f64],
    norm: Norm,
    quad: Quadrature,
) -> Result<Vec<(f64, f64)>> {
    let floor = 2.0 * u.h();
    for &r in rs {
        if r < floor {
            return Err(Error::resolution(format!(
                "sweep radius {r} is below the grid floor 2h = {floor}"
            )));
        }
    }
    rs.iter()
        .map(|&r| Ok((r, theta(u, r, norm, quad)?.value)))
        .collect()
}

/// Diagnostics of the asymptotic-mean construction along an increasing
/// radius schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BbmReport {
    pub big_r: Vec<f64>,
    pub eta: Vec<f64>,
    /// selected near-minimizer location per radius (a cell center, or a
    /// representative outside point when the tail wins)
    pub y: Vec<Vec<f64>>,
    pub y_is_tail: Vec<bool>,
    /// objective value at the selected y_n
    pub y_objective: Vec<f64>,
    /// averaged bound that the selected y_n must satisfy after halving
    pub theta_n: Vec<f64>,
    pub b_star: Vec<f64>,
    /// integral of dist(u, b_star); infinite when b_star differs from
    /// the tail
    #[serde(with = "serde_extended_f64")]
    pub lhs: f64,
    /// Theta(R_n)/2 per schedule entry
    pub rhs: Vec<f64>,
}

/// Constructive asymptotic mean: for each R_n set eta_n = 1/max(2, sqrt R_n)
/// and pick the candidate value minimizing the integral of dist(u(x), .)
/// over the origin-centered ball of radius eta_n R_n, candidates being the
/// window cells inside the ball of radius (1 - eta_n) R_n plus the tail when
/// that ball leaves the window. Ties break to the lowest row-major cell
/// index, with the tail candidate last. Returns b* = value at the last
/// selected point plus the diagnostic sequences.
pub fn asymptotic_mean(u: &GridMap, r_schedule: &[f64]) -> Result<BbmReport> {
    if r_schedule.len() < 2 {
        return Err(Error::domain("asymptotic mean needs at least 2 schedule radii"));
    }
    if !(r_schedule[0] > 0.0) {
        return Err(Error::domain("radius schedule must be positive"));
    }
    for w in r_schedule.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::domain("radius schedule must be increasing"));
        }
    }
    let m = u.manifold();
    let d = u.dim();
    let n = u.cell_count();
    let w = u.cell_volume();
    let norm = Norm::Euclidean;

    let centers: Vec<Vec<f64>> = (0..n).map(|i| u.cell_center(&u.unflatten(i))).collect();
    let radii: Vec<f64> = centers.iter().map(|c| norm.len(c)).collect();

    // representative point just outside the window, used when the tail is a
    // legitimate candidate
    let outside_rep: Vec<f64> = {
        let mut idx: Vec<usize> = u.counts().iter().map(|&c| c / 2).collect();
        idx[0] = u.counts()[0]; // one step beyond the +0 face
        (0..d)
            .map(|a| u.origin()[a] + (idx[a] as f64 + 0.5) * u.h())
            .collect()
    };

    let mut full_double: Option<f64> = None;
    let mut to_tail_cache: Option<f64> = None;
    let mut theta_of = |r: f64| -> Result<f64> {
        if r >= u.window_diameter(norm) {
            let fd = *full_double.get_or_insert_with(|| full_window_double_integral(u));
            let to_tail = *to_tail_cache
                .get_or_insert_with(|| par_sum(n, |i| w * m.dist_slice(u.value(i), u.tail())));
            let ball = norm.ball_volume(d, r);
            return Ok((fd + 2.0 * to_tail * (ball - u.window_volume())) / ball);
        }
        Ok(theta(u, r, norm, Quadrature::Midpoint)?.value)
    };

    let mut report = BbmReport {
        big_r: r_schedule.to_vec(),
        eta: Vec::new(),
        y: Vec::new(),
        y_is_tail: Vec::new(),
        y_objective: Vec::new(),
        theta_n: Vec::new(),
        b_star: Vec::new(),
        lhs: f64::NAN,
        rhs: Vec::new(),
    };

    let window_hi = u.window_hi();
    let mut last_value: Option<Vec<f64>> = None;
    for &big_r in r_schedule {
        let eta = 1.0 / 2.0f64.max(big_r.sqrt());
        let candidate_r = (1.0 - eta) * big_r;
        let inner_r = eta * big_r;

        // quadrature measure of the inner ball inside the window
        let in_ball: Vec<bool> = radii.iter().map(|&r| r <= inner_r).collect();
        let v_in = w * in_ball.iter().filter(|&&b| b).count() as f64;
        let ball_vol = norm.ball_volume(d, inner_r);
        let outside = (ball_vol - v_in).max(0.0);

        // objective: integral over the inner ball of dist(u(x), v)
        let objective = |v: &[f64]| -> f64 {
            let inner = par_sum(n, |i| {
                if in_ball[i] {
                    w * m.dist_slice(u.value(i), v)
                } else {
                    0.0
                }
            });
            inner + m.dist_slice(u.tail(), v) * outside
        };

        // candidates: window cells inside the candidate ball, then the tail
        let mut best: Option<(f64, usize)> = None; // candidate id n means tail
        for i in 0..n {
            if radii[i] <= candidate_r {
                let f = objective(u.value(i));
                if best.map_or(true, |(fb, _)| f < fb) {
                    best = Some((f, i));
                }
            }
        }
        let ball_inside_window = (0..d)
            .all(|a| u.origin()[a] <= -candidate_r && candidate_r <= window_hi[a]);
        if !ball_inside_window && norm.len(&outside_rep) <= candidate_r {
            let f = objective(u.tail());
            if best.map_or(true, |(fb, _)| f < fb) {
                best = Some((f, n));
            }
        }
        let (fbest, id) = best.ok_or_else(|| {
            Error::domain(format!(
                "no candidate cell inside the ball of radius {candidate_r}; radius schedule too small"
            ))
        })?;

        let theta_r = theta_of(big_r)?;
        let theta_inner = theta_of(2.0 * eta * big_r)?;
        let theta_n =
            (theta_r + (2.0 * eta).powi(d as i32) * theta_inner) / (1.0 - eta).powi(d as i32);

        report.eta.push(eta);
        report.rhs.push(theta_r / 2.0);
        report.theta_n.push(theta_n);
        report.y_objective.push(fbest);
        if id == n {
            report.y.push(outside_rep.clone());
            report.y_is_tail.push(true);
            last_value = Some(u.tail().to_vec());
        } else {
            report.y.push(centers[id].clone());
            report.y_is_tail.push(false);
            last_value = Some(u.value(id).to_vec());
        }
    }

    let b_star = last_value.expect("schedule is nonempty");
    report.lhs = integral_dist_to_point(u, &Point(b_star.clone()))?.value;
    report.b_star = b_star;
    Ok(report)
}
