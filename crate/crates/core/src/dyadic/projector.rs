//! Piecewise-dyadic-constant projection E_k.
//!
//! Each level-k cube gets the value of the grid cell minimizing the mean
//! distance to the map over the cube, so the median inequality
//!   mean_Q dist(E_k u (Q), u) <= mean_Q mean_Q dist(u(x), u(y))
//! holds by construction. The returned map lives on the cube-aligned
//! enlargement of the window, which makes it exactly representable as a
//! grid map with the original tail.

use super::lattice::DyadicLattice;
use crate::error::Result;
use crate::grid::{GridMap, IndexBox};
use crate::num::par_sum;

/// Project u onto level-k dyadic constants. Ties in the minimizing cell
/// break to the lowest row-major index of the enlarged grid, tail cells
/// last within each cube by construction of the iteration order.
pub fn project_ek(u: &GridMap, lattice: &DyadicLattice, k: i32) -> Result<GridMap> {
    let side_h = lattice.cells_per_cube_edge(u, k)?;
    let d = u.dim();
    let h = u.h();
    let nu = u.ambient_dim();
    let (cube_lo, cube_hi) = lattice.cover_of_window(u, k)?;
    let cubes = IndexBox::new(cube_lo.clone(), cube_hi.clone());

    let origin: Vec<f64> = (0..d)
        .map(|a| lattice.offset()[a] + cube_lo[a] as f64 * lattice.side(k))
        .collect();
    let counts: Vec<usize> = (0..d)
        .map(|a| ((cube_hi[a] - cube_lo[a]) * side_h) as usize)
        .collect();
    let ncells: usize = counts.iter().product();
    let m = u.manifold();

    let out_strides = {
        let mut st = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            st[a] = st[a + 1] * counts[a + 1];
        }
        st
    };

    // chosen value per cube, cubes processed independently
    let local = IndexBox::new(vec![0; d], vec![side_h; d]);
    let cube_values: Vec<Vec<f64>> = (0..cubes.count())
        .map(|cf| {
            let cube = cubes.unflatten(cf);
            // candidate cells inside the cube in enlarged-grid row-major order
            let cells: Vec<Vec<f64>> = local
                .iter()
                .map(|sub| {
                    let x: Vec<f64> = (0..d)
                        .map(|a| {
                            origin[a]
                                + (((cube[a] - cube_lo[a]) * side_h + sub[a]) as f64 + 0.5) * h
                        })
                        .collect();
                    u.value_at(&x).to_vec()
                })
                .collect();
            let mut best: Option<(f64, usize)> = None;
            for (ci, cand) in cells.iter().enumerate() {
                let score = par_sum(cells.len(), |j| m.dist_slice(cand, &cells[j]));
                if best.map_or(true, |(bs, _)| score < bs) {
                    best = Some((score, ci));
                }
            }
            let (_, ci) = best.expect("cube has at least one cell");
            cells[ci].clone()
        })
        .collect();

    let mut values = vec![0.0f64; ncells * nu];
    for cf in 0..cubes.count() {
        let cube = cubes.unflatten(cf);
        let v = &cube_values[cf];
        for sub in local.iter() {
            let mut flat = 0usize;
            for a in 0..d {
                let ia = ((cube[a] - cube_lo[a]) * side_h + sub[a]) as usize;
                flat += ia * out_strides[a];
            }
            values[flat * nu..(flat + 1) * nu].copy_from_slice(v);
        }
    }

    GridMap::new(m.clone(), origin, h, counts, values, u.tail().to_vec())
}

/// integral over R^d of dist(E u, u): the alpha residual of a projection.
/// Exact under the piecewise-constant model since the projected window
/// contains the original one and the tails agree outside.
pub fn projection_l1_defect(u: &GridMap, projected: &GridMap) -> f64 {
    let m = u.manifold();
    let w = projected.cell_volume();
    par_sum(projected.cell_count(), |i| {
        let idx = projected.unflatten(i);
        let x = projected.cell_center(&idx);
        w * m.dist_slice(projected.value(i), u.value_at(&x))
    })
}
