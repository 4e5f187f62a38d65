//! The three extension operators assembled from schedule -> joining ->
//! smoothing, together with the per-run diagnostics the reports and the
//! acceptance checks consume.

use super::bv::{build_bv_extension, jump_energy, BvExtension, FaceClass, FaceSmoothing, JumpEnergy};
use super::lattice::DyadicLattice;
use super::projector::projection_l1_defect;
use super::schedule::{select_schedule, LevelCert, ScheduleParams};
use super::smooth::smooth_extension;
use crate::energy::{
    asymptotic_mean, integral_dist_to_point, nonlocal_energy, pointwise_l1_distance, BbmReport,
};
use crate::error::{Error, Result};
use crate::grid::GridMap;
use crate::manifold::Point;
use crate::num::{safe_ratio, serde_extended_f64, Norm};
use crate::slab::SlabMap;
use crate::trace::total_gradient_energy;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StripParams {
    pub l: f64,
    pub n_max: usize,
    pub h_fine: f64,
    pub schedule: ScheduleParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripReport {
    pub gamma: f64,
    pub levels: Vec<i32>,
    pub truncated: bool,
    pub certs: Vec<LevelCert>,
    /// integral dist(u0, u1)
    #[serde(with = "serde_extended_f64")]
    pub l1_distance: f64,
    pub jump: JumpEnergy,
    pub gradient_energy: f64,
    /// unnormalized Euclidean-cutoff energies at radius L, per map
    pub nonlocal_l: [f64; 2],
    /// sup-norm cutoff energies at 2L and 6L entering the per-class jump bounds
    pub nonlocal_sup_2l: [f64; 2],
    pub nonlocal_sup_6l: [f64; 2],
    /// Euclidean-cutoff energies at radius 1 (the unit-strip statement)
    pub nonlocal_unit: [f64; 2],
    /// L-cutoff right-hand side: l1_distance + Gamma
    #[serde(with = "serde_extended_f64")]
    pub rhs_construction: f64,
    pub ratio_construction: f64,
    /// unit-cutoff right-hand side: l1_distance + sum of unit energies
    #[serde(with = "serde_extended_f64")]
    pub rhs_unit_cutoff: f64,
    pub ratio_unit_cutoff: f64,
    /// per side, per layer (scheduled layers then the exact final one):
    /// the L1 trace defect of the layer against its boundary map
    pub trace_defects: [Vec<f64>; 2],
    pub h_fine: f64,
}

/// Strip extension output: the smoothed slab, the underlying BV structure,
/// and the report.
pub struct StripExtension {
    pub slab: SlabMap,
    pub bv: BvExtension,
    pub report: StripReport,
}

/// Join u0 (bottom trace, t = -L) to u1 (top trace, t = +L) by the layered
/// BV map and smooth every jump face by its geodesic cone.
pub fn strip_extension(u0: &GridMap, u1: &GridMap, params: &StripParams) -> Result<StripExtension> {
    let l1 = pointwise_l1_distance(u0, u1)?;
    if !l1.value.is_finite() {
        return Err(Error::domain(
            "strip extension needs a finite interface distance: the two tails must agree",
        ));
    }
    let lattice = DyadicLattice::new(params.l, u0.dim())?;
    let schedule = select_schedule(u0, u1, &lattice, params.n_max, &params.schedule)?;
    let bv = build_bv_extension(u0, u1, &schedule)?;
    let slab = smooth_extension(&bv, params.h_fine)?;
    let report = strip_report(u0, u1, &bv, &slab, params, l1.value)?;
    Ok(StripExtension { slab, bv, report })
}

fn strip_report(
    u0: &GridMap,
    u1: &GridMap,
    bv: &BvExtension,
    slab: &SlabMap,
    params: &StripParams,
    l1_distance: f64,
) -> Result<StripReport> {
    let schedule = &bv.schedule;
    let l = params.l;
    let quad = params.schedule.quadrature;
    let maps = [u0, u1];
    let mut nonlocal_l = [0.0; 2];
    let mut sup2 = [0.0; 2];
    let mut sup6 = [0.0; 2];
    let mut unit = [0.0; 2];
    for i in 0..2 {
        nonlocal_l[i] = nonlocal_energy(maps[i], l, Norm::Euclidean, quad)?;
        sup2[i] = nonlocal_energy(maps[i], 2.0 * l, Norm::Sup, quad)?;
        sup6[i] = nonlocal_energy(maps[i], 6.0 * l, Norm::Sup, quad)?;
        unit[i] = nonlocal_energy(maps[i], 1.0, Norm::Euclidean, quad)?;
    }
    let grad = total_gradient_energy(slab);
    let rhs_construction = l1_distance + schedule.gamma;
    let rhs_unit = l1_distance + unit[0] + unit[1];
    let per = bv.layers_per_side();
    let mut trace_defects = [Vec::with_capacity(per), Vec::with_capacity(per)];
    for side in 0..2usize {
        for n in 0..per {
            let layer = bv.layer(side as u8, n);
            trace_defects[side].push(projection_l1_defect(maps[side], &layer.map));
        }
    }
    Ok(StripReport {
        gamma: schedule.gamma,
        levels: schedule.levels.clone(),
        truncated: schedule.truncated,
        certs: schedule.certs.clone(),
        l1_distance,
        jump: jump_energy(bv),
        gradient_energy: grad,
        nonlocal_l,
        nonlocal_sup_2l: sup2,
        nonlocal_sup_6l: sup6,
        nonlocal_unit: unit,
        rhs_construction,
        ratio_construction: safe_ratio(grad, rhs_construction),
        rhs_unit_cutoff: rhs_unit,
        ratio_unit_cutoff: safe_ratio(grad, rhs_unit),
        trace_defects,
        h_fine: params.h_fine,
    })
}

/// Boundary data on the cube Q(0,1) of R^{d+1}: per face (2 per axis),
/// either a d-dimensional grid map on [-1,1]^d or the constant base point.
/// Data is allowed on at most one opposed face pair.
#[derive(Debug, Clone)]
pub struct CubeBoundary {
    /// index 2*axis + side, side 0 = lo face, 1 = hi face
    pub faces: Vec<Option<GridMap>>,
}

impl CubeBoundary {
    pub fn ambient_cube_dim(&self) -> usize {
        self.faces.len() / 2
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubeReport {
    /// integral over the cube boundary of dist(u, p)
    pub boundary_l1: f64,
    pub gradient_energy: f64,
    pub ratio: f64,
    pub gamma: f64,
    pub levels: Vec<i32>,
    pub jump: JumpEnergy,
    /// number of lateral faces smoothed one-sidedly to pin the trace
    pub one_sided_faces: usize,
    pub data_axis: usize,
    pub h_fine: f64,
}

/// Extension into the unit cube with prescribed boundary trace: constant p
/// on every face except (at most) two opposed data faces. The joining runs
/// between the two padded data maps; faces lying on the lateral boundary of
/// Q are smoothed one-sidedly so the trace there stays exactly p.
pub fn cube_extension(
    boundary: &CubeBoundary,
    p: &Point,
    n_max: usize,
    h_fine: f64,
    sched: &ScheduleParams,
) -> Result<(SlabMap, CubeReport)> {
    let dq = boundary.ambient_cube_dim();
    if dq < 2 {
        return Err(Error::domain("cube extension needs an ambient dimension >= 2"));
    }
    let d = dq - 1;
    if boundary.faces.len() != 2 * dq {
        return Err(Error::schema(format!(
            "cube boundary needs {} face slots, got {}",
            2 * dq,
            boundary.faces.len()
        )));
    }
    // locate the (single) axis carrying non-constant data
    let mut data_axis: Option<usize> = None;
    for axis in 0..dq {
        for side in 0..2 {
            if boundary.faces[2 * axis + side].is_some() {
                match data_axis {
                    None => data_axis = Some(axis),
                    Some(a) if a == axis => {}
                    Some(_) => {
                        return Err(Error::domain(
                            "boundary data must be constant except on two opposed faces",
                        ))
                    }
                }
            }
        }
    }
    let axis = data_axis.unwrap_or(dq - 1);

    let face_map = |slot: usize, template: Option<&GridMap>| -> Result<GridMap> {
        match &boundary.faces[slot] {
            Some(g) => {
                if g.dim() != d {
                    return Err(Error::schema(format!(
                        "face map must have dimension {d}, got {}",
                        g.dim()
                    )));
                }
                for a in 0..d {
                    let hi = g.origin()[a] + g.h() * g.counts()[a] as f64;
                    if (g.origin()[a] + 1.0).abs() > 1e-9 || (hi - 1.0).abs() > 1e-9 {
                        return Err(Error::domain(
                            "face maps must live on the window [-1, 1]^d",
                        ));
                    }
                }
                if g.manifold().dist_slice(g.tail(), p.coords()) > 0.0 {
                    return Err(Error::domain(
                        "face map tails must equal the base point p",
                    ));
                }
                Ok(g.clone())
            }
            None => {
                let t = template.ok_or_else(|| {
                    Error::domain("cube extension with no data face needs a template grid")
                })?;
                GridMap::constant(
                    t.manifold().clone(),
                    t.origin().to_vec(),
                    t.h(),
                    t.counts().to_vec(),
                    p,
                )
            }
        }
    };
    let template = match boundary.faces.iter().flatten().next() {
        Some(g) => g.clone(),
        None => {
            return Err(Error::domain(
                "cube extension needs at least one data face to fix the grid resolution",
            ))
        }
    };
    let v0 = face_map(2 * axis, Some(&template))?;
    let v1 = face_map(2 * axis + 1, Some(&template))?;
    if !v0.same_geometry(&v1) {
        return Err(Error::domain("the two data faces must share their grid geometry"));
    }
    v0.manifold().check_on(p.coords())?;

    // lattice anchored so [-1,1]^d is a single level-0 cube
    let lattice = DyadicLattice::with_offset(1.0, vec![-1.0; d])?;
    let schedule = select_schedule(&v0, &v1, &lattice, n_max, sched)?;
    let mut bv = build_bv_extension(&v0, &v1, &schedule)?;

    // faces on the lateral boundary of Q switch to the one-sided cone,
    // pinned to the outside value p
    let mut one_sided = 0usize;
    for f in &mut bv.faces {
        if f.class == FaceClass::Perpendicular {
            if (f.position - 1.0).abs() < 1e-12 {
                f.smoothing = FaceSmoothing::OneSidedTowardLo;
                one_sided += 1;
            } else if (f.position + 1.0).abs() < 1e-12 {
                f.smoothing = FaceSmoothing::OneSidedTowardHi;
                one_sided += 1;
            }
        }
    }

    let slab_full = smooth_extension(&bv, h_fine)?;
    let slab = slab_full.restrict_lateral(&vec![-1.0; d], &vec![1.0; d])?;

    // boundary L1 distance to p: only the data faces contribute
    let mut boundary_l1 = 0.0;
    for g in boundary.faces.iter().flatten() {
        boundary_l1 += integral_dist_to_point(g, p)?.value;
    }
    let grad = total_gradient_energy(&slab);
    let report = CubeReport {
        boundary_l1,
        gradient_energy: grad,
        ratio: safe_ratio(grad, boundary_l1),
        gamma: schedule.gamma,
        levels: schedule.levels.clone(),
        jump: jump_energy(&bv),
        one_sided_faces: one_sided,
        data_axis: axis,
        h_fine,
    };
    Ok((slab, report))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfspaceReport {
    pub bbm: BbmReport,
    pub strip: StripReport,
    /// Theta at the last schedule radius, the proxy for the asymptotic
    /// energy bound
    pub theta_limit: f64,
    pub ratio_vs_theta_limit: f64,
}

/// Extension to the half space: compute the asymptotic mean b*, join u to
/// the constant b* across a strip of height 2L, and continue by b* above
/// (zero additional energy). The returned slab lives on (0, 2L) with the
/// trace u at t = 0.
pub fn halfspace_extension(
    u: &GridMap,
    params: &StripParams,
    r_schedule: Option<&[f64]>,
) -> Result<(SlabMap, HalfspaceReport)> {
    let default_schedule: Vec<f64>;
    let rs: &[f64] = match r_schedule {
        Some(rs) => rs,
        None => {
            let diam = u.window_diameter(Norm::Euclidean);
            default_schedule = [2.5, 5.0, 10.0, 25.0, 100.0].iter().map(|c| c * diam).collect();
            &default_schedule
        }
    };
    let bbm = asymptotic_mean(u, rs)?;
    let b_star = Point(bbm.b_star.clone());
    if u.manifold().dist_slice(u.tail(), b_star.coords()) > 0.0 {
        return Err(Error::domain(
            "asymptotic mean differs from the tail: the half-space energy is infinite",
        ));
    }
    let u1 = GridMap::constant(
        u.manifold().clone(),
        u.origin().to_vec(),
        u.h(),
        u.counts().to_vec(),
        &b_star,
    )?;
    let strip = strip_extension(u, &u1, params)?;
    let theta_limit = 2.0 * bbm.rhs.last().copied().unwrap_or(0.0);
    let ratio = safe_ratio(strip.report.gradient_energy, theta_limit);
    let slab = strip.slab.with_transverse_origin(0.0);
    Ok((
        slab,
        HalfspaceReport { bbm, strip: strip.report, theta_limit, ratio_vs_theta_limit: ratio },
    ))
}
