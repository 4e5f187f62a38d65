//! Nested dyadic cube lattices.
//!
//! Level k holds axis-aligned cubes of side 2^{1-k} L (radius 2^{-k} L),
//! anchored so that cube walls sit on integer multiples of the side length
//! relative to a global offset. Anchoring by corners keeps the levels
//! nested, which the subcube sums of the joining construction require; the
//! offset lets a level-0 cube coincide with a prescribed domain cube.

use crate::error::{Error, Result};
use crate::grid::GridMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicLattice {
    l: f64,
    offset: Vec<f64>,
}

impl DyadicLattice {
    pub fn new(l: f64, d: usize) -> Result<Self> {
        Self::with_offset(l, vec![0.0; d])
    }

    pub fn with_offset(l: f64, offset: Vec<f64>) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::domain(format!("lattice scale L must be positive, got {l}")));
        }
        if offset.is_empty() {
            return Err(Error::domain("lattice needs dimension >= 1"));
        }
        Ok(Self { l, offset })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Side length of level-k cubes: 2^{1-k} L.
    pub fn side(&self, k: i32) -> f64 {
        self.l * ((1 - k) as f64).exp2()
    }

    /// Cube radius 2^{-k} L.
    pub fn radius(&self, k: i32) -> f64 {
        self.side(k) / 2.0
    }

    /// Cube measure (2^{1-k} L)^d.
    pub fn cube_measure(&self, k: i32) -> f64 {
        self.side(k).powi(self.dim() as i32)
    }

    /// Number of grid cells per cube edge at level k, when the grid divides
    /// the cubes evenly and shares the lattice phase.
    pub fn cells_per_cube_edge(&self, grid: &GridMap, k: i32) -> Result<i64> {
        if grid.dim() != self.dim() {
            return Err(Error::domain(format!(
                "lattice dimension {} vs grid dimension {}",
                self.dim(),
                grid.dim()
            )));
        }
        let h = grid.h();
        let ratio = self.side(k) / h;
        let side_h = ratio.round();
        if side_h < 1.0 || (ratio - side_h).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::resolution(format!(
                "dyadic level {k} (cube side {}) is not an integer multiple of the grid spacing {h}",
                self.side(k)
            )));
        }
        for a in 0..self.dim() {
            let t = (grid.origin()[a] - self.offset[a]) / h;
            if (t - t.round()).abs() > 1e-9 * t.abs().max(1.0) {
                return Err(Error::resolution(format!(
                    "grid origin coordinate {} is not aligned with the dyadic lattice (offset {}, h {h})",
                    grid.origin()[a],
                    self.offset[a]
                )));
            }
        }
        Ok(side_h as i64)
    }

    /// Deepest level whose cubes are still unions of grid cells.
    pub fn max_level(&self, grid: &GridMap) -> Result<i32> {
        self.cells_per_cube_edge(grid, 0)?;
        let mut k = 0;
        while self.cells_per_cube_edge(grid, k + 1).is_ok() {
            k += 1;
        }
        Ok(k)
    }

    /// Index of the level-k cube containing x.
    pub fn cube_index_of(&self, x: &[f64], k: i32) -> Vec<i64> {
        let side = self.side(k);
        (0..self.dim())
            .map(|a| ((x[a] - self.offset[a]) / side).floor() as i64)
            .collect()
    }

    pub fn cube_lo(&self, idx: &[i64], k: i32) -> Vec<f64> {
        let side = self.side(k);
        (0..self.dim())
            .map(|a| self.offset[a] + idx[a] as f64 * side)
            .collect()
    }

    pub fn cube_hi(&self, idx: &[i64], k: i32) -> Vec<f64> {
        let side = self.side(k);
        (0..self.dim())
            .map(|a| self.offset[a] + (idx[a] + 1) as f64 * side)
            .collect()
    }

    pub fn cube_center(&self, idx: &[i64], k: i32) -> Vec<f64> {
        let side = self.side(k);
        (0..self.dim())
            .map(|a| self.offset[a] + (idx[a] as f64 + 0.5) * side)
            .collect()
    }

    /// Cube index range [lo, hi) at level k covering the grid window.
    pub fn cover_of_window(&self, grid: &GridMap, k: i32) -> Result<(Vec<i64>, Vec<i64>)> {
        let side_h = self.cells_per_cube_edge(grid, k)?;
        let h = grid.h();
        let mut lo = vec![0i64; self.dim()];
        let mut hi = vec![0i64; self.dim()];
        for a in 0..self.dim() {
            let lo_h = ((grid.origin()[a] - self.offset[a]) / h).round() as i64;
            let hi_h = lo_h + grid.counts()[a] as i64;
            lo[a] = lo_h.div_euclid(side_h);
            hi[a] = (hi_h - 1).div_euclid(side_h) + 1;
        }
        Ok((lo, hi))
    }
}
