//! Joining two grid maps by a map of bounded variation on the slab
//! R^d x (-L, L): piecewise constant on rectangular cuboids (dyadic cube x
//! layer interval), finishing at each boundary with an exact grid-scale
//! layer so the discrete traces are u0 and u1 with zero defect.
//!
//! Jump faces fall into three classes: the interface at t = 0,
//! parallel faces between consecutive layers, and perpendicular faces
//! between laterally adjacent cuboids of one layer.

use super::lattice::DyadicLattice;
use super::projector::project_ek;
use super::schedule::DyadicSchedule;
use crate::error::{Error, Result};
use crate::grid::{GridMap, IndexBox};
use crate::manifold::Manifold;
use crate::num::CompensatedSum;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceClass {
    /// the t = 0 plane between the two boundary data
    Interface,
    /// horizontal faces between consecutive layers of one side
    Parallel,
    /// lateral faces between adjacent cuboids of one layer
    Perpendicular,
}

/// How the geodesic cone replaces the jump. The one-sided variants pin the
/// trace on the face itself and modify only one adjacent cuboid; they are
/// used on domain boundaries in the cube extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceSmoothing {
    TwoSided,
    /// modify the lo side only; the face keeps the hi-side value
    OneSidedTowardLo,
    /// modify the hi side only; the face keeps the lo-side value
    OneSidedTowardHi,
}

/// A d-dimensional axis-aligned jump face embedded in R^{d+1}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpFace {
    pub class: FaceClass,
    pub smoothing: FaceSmoothing,
    /// axis of R^{d+1} the face is normal to; axis d is the transverse one
    pub normal_axis: usize,
    pub position: f64,
    /// face box, with lo[normal_axis] == hi[normal_axis] == position
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// value on the lo side of the normal axis
    pub a: Vec<f64>,
    /// value on the hi side
    pub b: Vec<f64>,
    /// half the smaller adjacent cuboid extent along the normal axis
    pub clip: f64,
}

impl JumpFace {
    pub fn area(&self) -> f64 {
        let mut v = 1.0;
        for a in 0..self.lo.len() {
            if a != self.normal_axis {
                v *= self.hi[a] - self.lo[a];
            }
        }
        v
    }

    pub fn jump_dist(&self, m: &Manifold) -> f64 {
        m.dist_slice(&self.a, &self.b)
    }
}

/// One horizontal layer of the construction.
#[derive(Debug, Clone)]
pub struct Layer {
    pub side: u8,
    pub n: usize,
    /// dyadic level, or None for the final exact grid-scale layer
    pub level: Option<i32>,
    pub t_lo: f64,
    pub t_hi: f64,
    /// lateral unit size: cube side for scheduled layers, h for the final
    pub unit: f64,
    pub map: GridMap,
}

impl Layer {
    pub fn thickness(&self) -> f64 {
        self.t_hi - self.t_lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum FaceKey {
    Interface { unit: [i64; 4] },
    Parallel { side: u8, boundary: u8, unit: [i64; 4] },
    Perp { side: u8, layer: u8, axis: u8, unit: [i64; 4] },
}

fn pad(v: &[i64]) -> [i64; 4] {
    let mut out = [0i64; 4];
    out[..v.len()].copy_from_slice(v);
    out
}

/// The piecewise-constant joining map plus its jump structure.
#[derive(Debug, Clone)]
pub struct BvExtension {
    pub manifold: Manifold,
    pub d: usize,
    pub lattice: DyadicLattice,
    pub schedule: DyadicSchedule,
    /// side-0 block then side-1 block, layer index ascending inside each
    pub layers: Vec<Layer>,
    pub faces: Vec<JumpFace>,
    pub(crate) face_lookup: HashMap<FaceKey, usize>,
    /// lateral active box (level-0 cover of both windows plus one cube ring)
    pub active_lo: Vec<f64>,
    pub active_hi: Vec<f64>,
    pub tail: Vec<f64>,
}

impl BvExtension {
    pub fn layers_per_side(&self) -> usize {
        self.layers.len() / 2
    }

    pub fn layer(&self, side: u8, n: usize) -> &Layer {
        &self.layers[side as usize * self.layers_per_side() + n]
    }

    /// Index of the layer containing transverse coordinate t (t = 0 and the
    /// breakpoints themselves resolve to the side-1 / upper layer).
    pub fn layer_index_at(&self, t: f64) -> Result<usize> {
        let l = self.schedule.l;
        if t <= -l || t >= l {
            return Err(Error::domain(format!("t = {t} outside the slab (-{l}, {l})")));
        }
        let side = if t < 0.0 { 0u8 } else { 1u8 };
        let per = self.layers_per_side();
        let at = t.abs();
        for n in 0..per {
            let (a, b) = self.schedule.interval(n, 1);
            if at >= a && at < b {
                return Ok(side as usize * per + n);
            }
        }
        Ok(side as usize * per + per - 1)
    }

    /// Cuboid constant at (x, t).
    pub fn value_at(&self, x: &[f64], t: f64) -> Result<&[f64]> {
        let layer = &self.layers[self.layer_index_at(t)?];
        Ok(layer.map.value_at(x))
    }

    /// Lateral unit index of x at a layer's resolution.
    pub(crate) fn unit_index(&self, x: &[f64], layer: &Layer) -> Vec<i64> {
        (0..self.d)
            .map(|a| ((x[a] - self.lattice.offset()[a]) / layer.unit).floor() as i64)
            .collect()
    }

    /// Face indices whose cones can touch the cuboid of (x, t): its
    /// interface/parallel neighbors along t plus the 2d lateral ones.
    pub(crate) fn candidate_faces(&self, x: &[f64], layer_idx: usize, out: &mut Vec<usize>) {
        out.clear();
        let per = self.layers_per_side();
        let layer = &self.layers[layer_idx];
        let side = layer.side;
        let n = layer.n;
        let mu = self.unit_index(x, layer);

        if n == 0 {
            let u0 = self.unit_index(x, self.layer(0, 0));
            if let Some(&f) = self.face_lookup.get(&FaceKey::Interface { unit: pad(&u0) }) {
                out.push(f);
            }
        }
        // boundary b sits between layers b-1 and b of this side
        for b in [n, n + 1] {
            if b >= 1 && b < per {
                let fine = self.layer(side, b);
                let ub = self.unit_index(x, fine);
                let key = FaceKey::Parallel { side, boundary: b as u8, unit: pad(&ub) };
                if let Some(&f) = self.face_lookup.get(&key) {
                    out.push(f);
                }
            }
        }
        for axis in 0..self.d {
            for delta in [-1i64, 0] {
                let mut u = mu.clone();
                u[axis] += delta;
                let key =
                    FaceKey::Perp { side, layer: n as u8, axis: axis as u8, unit: pad(&u) };
                if let Some(&f) = self.face_lookup.get(&key) {
                    out.push(f);
                }
            }
        }
    }

    /// All cuboids over the active box: (lo, hi, value), for partition
    /// checks and reports.
    pub fn cuboids(&self) -> Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let mut out = Vec::new();
        for layer in &self.layers {
            let range = self.unit_range(layer);
            for m in range.iter() {
                let mut lo: Vec<f64> = (0..self.d)
                    .map(|a| self.lattice.offset()[a] + m[a] as f64 * layer.unit)
                    .collect();
                let mut hi: Vec<f64> = (0..self.d)
                    .map(|a| self.lattice.offset()[a] + (m[a] + 1) as f64 * layer.unit)
                    .collect();
                let center: Vec<f64> = (0..self.d).map(|a| (lo[a] + hi[a]) / 2.0).collect();
                let v = layer.map.value_at(&center).to_vec();
                lo.push(layer.t_lo);
                hi.push(layer.t_hi);
                out.push((lo, hi, v));
            }
        }
        out
    }

    /// Lateral unit index range of the active box at a layer's resolution.
    pub(crate) fn unit_range(&self, layer: &Layer) -> IndexBox {
        let lo: Vec<i64> = (0..self.d)
            .map(|a| ((self.active_lo[a] - self.lattice.offset()[a]) / layer.unit).round() as i64)
            .collect();
        let hi: Vec<i64> = (0..self.d)
            .map(|a| ((self.active_hi[a] - self.lattice.offset()[a]) / layer.unit).round() as i64)
            .collect();
        IndexBox::new(lo, hi)
    }
}

/// Per-class jump energies: integral over the jump set of the geodesic
/// distance between the one-sided values.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JumpEnergy {
    pub total: f64,
    pub interface: f64,
    pub parallel: f64,
    pub perpendicular: f64,
}

pub fn jump_energy(bv: &BvExtension) -> JumpEnergy {
    let m = &bv.manifold;
    let mut per = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
    for f in &bv.faces {
        let e = f.area() * f.jump_dist(m);
        let slot = match f.class {
            FaceClass::Interface => 0,
            FaceClass::Parallel => 1,
            FaceClass::Perpendicular => 2,
        };
        per[slot].add(e);
    }
    let (i, p, q) = (per[0].value(), per[1].value(), per[2].value());
    JumpEnergy { total: i + p + q, interface: i, parallel: p, perpendicular: q }
}

/// Assemble the layered map and enumerate its jump faces.
pub fn build_bv_extension(
    u0: &GridMap,
    u1: &GridMap,
    schedule: &DyadicSchedule,
) -> Result<BvExtension> {
    if !u0.same_geometry(u1) {
        return Err(Error::domain("joining needs maps on a shared grid geometry"));
    }
    let m = u0.manifold().clone();
    if m.dist_slice(u0.tail(), u1.tail()) > 0.0 {
        return Err(Error::domain(
            "joining needs equal tails, otherwise the interface distance is infinite",
        ));
    }
    let d = u0.dim();
    if d > 4 {
        return Err(Error::domain("joining construction supports d <= 4"));
    }
    let lattice = schedule.lattice.clone();
    let nlay = schedule.scheduled_layers();

    // layers: scheduled projections then the exact grid-scale finish
    let maps = [u0, u1];
    let mut layers = Vec::with_capacity(2 * (nlay + 1));
    for side in 0..2u8 {
        for n in 0..=nlay {
            let (t_lo, t_hi) = schedule.interval(n, side);
            let (level, unit, map) = if n < nlay {
                let k = schedule.levels[n];
                (Some(k), lattice.side(k), project_ek(maps[side as usize], &lattice, k)?)
            } else {
                (None, u0.h(), maps[side as usize].clone())
            };
            layers.push(Layer { side, n, level, t_lo, t_hi, unit, map });
        }
    }

    // active lateral box: level-0 cover of both windows plus one cube ring
    let (lo0, hi0) = lattice.cover_of_window(u0, 0)?;
    let (lo1, hi1) = lattice.cover_of_window(u1, 0)?;
    let side0 = lattice.side(0);
    let active_lo: Vec<f64> = (0..d)
        .map(|a| lattice.offset()[a] + (lo0[a].min(lo1[a]) - 1) as f64 * side0)
        .collect();
    let active_hi: Vec<f64> = (0..d)
        .map(|a| lattice.offset()[a] + (hi0[a].max(hi1[a]) + 1) as f64 * side0)
        .collect();

    let mut bv = BvExtension {
        manifold: m.clone(),
        d,
        lattice,
        schedule: schedule.clone(),
        layers,
        faces: Vec::new(),
        face_lookup: HashMap::new(),
        active_lo,
        active_hi,
        tail: u0.tail().to_vec(),
    };

    let push = |bv: &mut BvExtension, key: FaceKey, face: JumpFace| {
        bv.face_lookup.insert(key, bv.faces.len());
        bv.faces.push(face);
    };

    // (i) interface at t = 0, at the resolution shared by the two n = 0 layers
    {
        let below = bv.layer(0, 0);
        let above = bv.layer(1, 0);
        let clip = below.thickness().min(above.thickness()) / 2.0;
        let unit = below.unit;
        let range = bv.unit_range(below);
        let mut new_faces = Vec::new();
        for mu in range.iter() {
            let center: Vec<f64> = (0..d)
                .map(|a| bv.lattice.offset()[a] + (mu[a] as f64 + 0.5) * unit)
                .collect();
            let va = below.map.value_at(&center);
            let vb = above.map.value_at(&center);
            if m.dist_slice(va, vb) > 0.0 {
                let mut lo: Vec<f64> = (0..d)
                    .map(|a| bv.lattice.offset()[a] + mu[a] as f64 * unit)
                    .collect();
                let mut hi: Vec<f64> = (0..d)
                    .map(|a| bv.lattice.offset()[a] + (mu[a] + 1) as f64 * unit)
                    .collect();
                lo.push(0.0);
                hi.push(0.0);
                new_faces.push((
                    FaceKey::Interface { unit: pad(&mu) },
                    JumpFace {
                        class: FaceClass::Interface,
                        smoothing: FaceSmoothing::TwoSided,
                        normal_axis: d,
                        position: 0.0,
                        lo,
                        hi,
                        a: va.to_vec(),
                        b: vb.to_vec(),
                        clip,
                    },
                ));
            }
        }
        for (k, f) in new_faces {
            push(&mut bv, k, f);
        }
    }

    // (ii) parallel faces between consecutive layers of each side
    for side in 0..2u8 {
        for b in 1..=nlay {
            let coarse = bv.layer(side, b - 1);
            let fine = bv.layer(side, b);
            let clip = coarse.thickness().min(fine.thickness()) / 2.0;
            let unit = fine.unit;
            let position = if side == 1 { fine.t_lo } else { fine.t_hi };
            let range = bv.unit_range(fine);
            let mut new_faces = Vec::new();
            for mu in range.iter() {
                let center: Vec<f64> = (0..d)
                    .map(|a| bv.lattice.offset()[a] + (mu[a] as f64 + 0.5) * unit)
                    .collect();
                let v_coarse = coarse.map.value_at(&center);
                let v_fine = fine.map.value_at(&center);
                if m.dist_slice(v_coarse, v_fine) > 0.0 {
                    // on the positive side the coarse layer sits below the
                    // boundary, on the negative side above it
                    let (va, vb) = if side == 1 {
                        (v_coarse.to_vec(), v_fine.to_vec())
                    } else {
                        (v_fine.to_vec(), v_coarse.to_vec())
                    };
                    let mut lo: Vec<f64> = (0..d)
                        .map(|a| bv.lattice.offset()[a] + mu[a] as f64 * unit)
                        .collect();
                    let mut hi: Vec<f64> = (0..d)
                        .map(|a| bv.lattice.offset()[a] + (mu[a] + 1) as f64 * unit)
                        .collect();
                    lo.push(position);
                    hi.push(position);
                    new_faces.push((
                        FaceKey::Parallel { side, boundary: b as u8, unit: pad(&mu) },
                        JumpFace {
                            class: FaceClass::Parallel,
                            smoothing: FaceSmoothing::TwoSided,
                            normal_axis: d,
                            position,
                            lo,
                            hi,
                            a: va,
                            b: vb,
                            clip,
                        },
                    ));
                }
            }
            for (k, f) in new_faces {
                push(&mut bv, k, f);
            }
        }
    }

    // (iii) perpendicular faces between adjacent cuboids of each layer
    for side in 0..2u8 {
        for n in 0..=nlay {
            let layer = bv.layer(side, n);
            let unit = layer.unit;
            let (t_lo, t_hi) = (layer.t_lo, layer.t_hi);
            let clip = unit / 2.0;
            let range = bv.unit_range(layer);
            let mut new_faces = Vec::new();
            for mu in range.iter() {
                let center: Vec<f64> = (0..d)
                    .map(|a| bv.lattice.offset()[a] + (mu[a] as f64 + 0.5) * unit)
                    .collect();
                let va = layer.map.value_at(&center);
                for axis in 0..d {
                    let mut nb = mu.clone();
                    nb[axis] += 1;
                    if nb[axis] >= range.hi[axis] {
                        continue;
                    }
                    let mut ncenter = center.clone();
                    ncenter[axis] += unit;
                    let vb = layer.map.value_at(&ncenter);
                    if m.dist_slice(va, vb) > 0.0 {
                        let position = bv.lattice.offset()[axis] + nb[axis] as f64 * unit;
                        let mut lo: Vec<f64> = (0..d)
                            .map(|a| bv.lattice.offset()[a] + mu[a] as f64 * unit)
                            .collect();
                        let mut hi: Vec<f64> = (0..d)
                            .map(|a| bv.lattice.offset()[a] + (mu[a] + 1) as f64 * unit)
                            .collect();
                        lo[axis] = position;
                        hi[axis] = position;
                        lo.push(t_lo);
                        hi.push(t_hi);
                        new_faces.push((
                            FaceKey::Perp {
                                side,
                                layer: n as u8,
                                axis: axis as u8,
                                unit: pad(&mu),
                            },
                            JumpFace {
                                class: FaceClass::Perpendicular,
                                smoothing: FaceSmoothing::TwoSided,
                                normal_axis: axis,
                                position,
                                lo,
                                hi,
                                a: va.to_vec(),
                                b: vb.to_vec(),
                                clip,
                            },
                        ));
                    }
                }
            }
            for (k, f) in new_faces {
                push(&mut bv, k, f);
            }
        }
    }

    Ok(bv)
}
