//! Geodesic-cone smoothing of the BV joining map.
//!
//! Every jump face P with one-sided values (a, b) is replaced inside the
//! double cone { 2 |t| <= dist(x, boundary of P) } (face-local coordinates)
//! by the geodesic profile from a to b; the cones of distinct faces are
//! pairwise disjoint up to measure zero because their 2:1 slopes pinch at
//! shared edges. Outside all cones the cuboid constants remain.

use super::bv::{BvExtension, FaceSmoothing, JumpFace};
use crate::error::{Error, Result};
use crate::manifold::Manifold;
use crate::slab::SlabMap;
use rayon::prelude::*;

/// Value of the cone replacement of `face` at the point p (d+1 coords),
/// or None when p is outside the cone.
pub fn cone_value(face: &JumpFace, m: &Manifold, p: &[f64]) -> Result<Option<Vec<f64>>> {
    let na = face.normal_axis;
    let t_loc = p[na] - face.position;
    let mut dl = f64::INFINITY;
    for a in 0..p.len() {
        if a == na {
            continue;
        }
        let lo = p[a] - face.lo[a];
        let hi = face.hi[a] - p[a];
        if lo <= 0.0 || hi <= 0.0 {
            return Ok(None);
        }
        dl = dl.min(lo.min(hi));
    }
    let nu = face.a.len();
    let mut out = vec![0.0; nu];
    match face.smoothing {
        FaceSmoothing::TwoSided => {
            if 2.0 * t_loc.abs() <= dl && t_loc.abs() <= face.clip {
                m.profile_value(&face.a, &face.b, 2.0 * t_loc / dl, &mut out)?;
                Ok(Some(out))
            } else {
                Ok(None)
            }
        }
        FaceSmoothing::OneSidedTowardHi => {
            if t_loc >= 0.0 && 2.0 * t_loc <= dl && t_loc <= face.clip {
                m.one_sided_value(&face.a, &face.b, 2.0 * t_loc / dl, &mut out)?;
                Ok(Some(out))
            } else {
                Ok(None)
            }
        }
        FaceSmoothing::OneSidedTowardLo => {
            if t_loc <= 0.0 && 2.0 * (-t_loc) <= dl && -t_loc <= face.clip {
                m.one_sided_value(&face.b, &face.a, 2.0 * (-t_loc) / dl, &mut out)?;
                Ok(Some(out))
            } else {
                Ok(None)
            }
        }
    }
}

fn is_power_of_two_ratio(num: f64, den: f64) -> bool {
    let r = num / den;
    if !(r >= 1.0) {
        return false;
    }
    let l = r.log2().round();
    ((l.exp2() - r) / r).abs() < 1e-9
}

/// Sample the smoothed map on a fine (d+1)-grid over the active box times
/// (-L, L). The fine spacing must be a power-of-two fraction of the grid
/// spacing and give at least 4 samples across the thinnest layer, so fine
/// cells nest in every cuboid and trace slices stay exact.
pub fn smooth_extension(bv: &BvExtension, h_fine: f64) -> Result<SlabMap> {
    let d = bv.d;
    let h = bv.layer(0, bv.layers_per_side() - 1).map.h();
    if !(h_fine > 0.0) {
        return Err(Error::domain("h_fine must be positive"));
    }
    if !is_power_of_two_ratio(h, h_fine) {
        return Err(Error::resolution(format!(
            "h_fine = {h_fine} must divide the grid spacing {h} by a power of two"
        )));
    }
    let thinnest = bv.schedule.thinnest_layer();
    if h_fine > thinnest / 4.0 + 1e-12 * thinnest {
        return Err(Error::resolution(format!(
            "h_fine = {h_fine} cannot resolve the thinnest layer ({} wide, the exact \
             grid-floor layer next to each boundary); need h_fine <= {}",
            thinnest,
            thinnest / 4.0
        )));
    }

    let l = bv.schedule.l;
    let mut origin: Vec<f64> = bv.active_lo.clone();
    origin.push(-l);
    let mut counts: Vec<usize> = (0..d)
        .map(|a| ((bv.active_hi[a] - bv.active_lo[a]) / h_fine).round() as usize)
        .collect();
    counts.push((2.0 * l / h_fine).round() as usize);

    let nu = bv.manifold.ambient_dim();
    let ncells: usize = counts.iter().product();
    let mut values = vec![0.0f64; ncells * nu];
    let m = bv.manifold.clone();

    let strides = {
        let mut st = vec![1usize; d + 1];
        for a in (0..d).rev() {
            st[a] = st[a + 1] * counts[a + 1];
        }
        st
    };

    values
        .par_chunks_mut(nu)
        .enumerate()
        .try_for_each_init(
            || (Vec::<usize>::new(), vec![0.0f64; d + 1]),
            |(buf, p), (flat, out)| -> Result<()> {
                let mut rem = flat;
                for a in 0..=d {
                    let extent = counts[a];
                    let i = (rem / strides[a]) % extent;
                    p[a] = origin[a] + (i as f64 + 0.5) * h_fine;
                    rem %= strides[a] * extent;
                }
                let t = p[d];
                let li = bv.layer_index_at(t)?;
                bv.candidate_faces(&p[..d], li, buf);
                for &fi in buf.iter() {
                    if let Some(v) = cone_value(&bv.faces[fi], &m, p)? {
                        out.copy_from_slice(&v);
                        return Ok(());
                    }
                }
                out.copy_from_slice(bv.layers[li].map.value_at(&p[..d]));
                Ok(())
            },
        )?;

    let nt = counts[d];
    let mut tails = Vec::with_capacity(nt * nu);
    for _ in 0..nt {
        tails.extend_from_slice(&bv.tail);
    }
    SlabMap::new(m, origin, h_fine, counts, values, tails)
}
