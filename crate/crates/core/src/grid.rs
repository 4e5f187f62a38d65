//! Discretized maps u: R^d -> N, piecewise constant on a uniform grid with
//! a constant tail outside a finite window. The tail is what makes every
//! R^d-integral downstream finitely computable.

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point};
use serde::{Deserialize, Serialize};

/// Iterate the integer lattice box `lo <= i < hi` in row-major order
/// (last axis fastest).
#[derive(Debug, Clone)]
pub struct IndexBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl IndexBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn count(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a).max(0) as usize)
            .product()
    }

    pub fn contains(&self, idx: &[i64]) -> bool {
        idx.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(i, (a, b))| a <= i && i < b)
    }

    /// Multi-index of the `flat`-th element in row-major order.
    pub fn unflatten(&self, flat: usize) -> Vec<i64> {
        let mut idx = vec![0i64; self.dim()];
        let mut rem = flat;
        for a in (0..self.dim()).rev() {
            let extent = (self.hi[a] - self.lo[a]) as usize;
            idx[a] = self.lo[a] + (rem % extent) as i64;
            rem /= extent;
        }
        idx
    }

    pub fn flatten(&self, idx: &[i64]) -> usize {
        let mut flat = 0usize;
        for a in 0..self.dim() {
            let extent = (self.hi[a] - self.lo[a]) as usize;
            flat = flat * extent + (idx[a] - self.lo[a]) as usize;
        }
        flat
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.count()).map(|f| self.unflatten(f))
    }
}

/// A map u: R^d -> N, constant on each grid cell, equal to `tail` outside
/// the window. Immutable after construction.
#[derive(Debug, Clone)]
pub struct GridMap {
    manifold: Manifold,
    d: usize,
    origin: Vec<f64>,
    h: f64,
    counts: Vec<usize>,
    /// cell values, row-major, ncells x nu flat
    values: Vec<f64>,
    /// constant value outside the window
    tail: Vec<f64>,
}

impl GridMap {
    pub fn new(
        manifold: Manifold,
        origin: Vec<f64>,
        h: f64,
        counts: Vec<usize>,
        values: Vec<f64>,
        tail: Vec<f64>,
    ) -> Result<Self> {
        let d = counts.len();
        if d == 0 {
            return Err(Error::domain("grid needs dimension >= 1"));
        }
        if origin.len() != d {
            return Err(Error::schema(format!(
                "origin has {} coordinates, counts give d = {}",
                origin.len(),
                d
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain("cell size h must be positive and finite"));
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::domain("cell counts must all be positive"));
        }
        let nu = manifold.ambient_dim();
        let ncells: usize = counts.iter().product();
        if values.len() != ncells * nu {
            return Err(Error::schema(format!(
                "values length {} does not match {} cells x {} coordinates",
                values.len(),
                ncells,
                nu
            )));
        }
        manifold.check_on(&tail)?;
        for i in 0..ncells {
            manifold.check_on(&values[i * nu..(i + 1) * nu])?;
        }
        Ok(Self { manifold, d, origin, h, counts, values, tail })
    }

    /// Constant map: all cells and the tail equal `value`.
    pub fn constant(
        manifold: Manifold,
        origin: Vec<f64>,
        h: f64,
        counts: Vec<usize>,
        value: &Point,
    ) -> Result<Self> {
        let nu = manifold.ambient_dim();
        let ncells: usize = counts.iter().product();
        let mut values = Vec::with_capacity(ncells * nu);
        for _ in 0..ncells {
            values.extend_from_slice(value.coords());
        }
        Self::new(manifold, origin, h, counts, values, value.coords().to_vec())
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ambient_dim(&self) -> usize {
        self.manifold.ambient_dim()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn cell_count(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    pub fn tail_point(&self) -> Point {
        Point(self.tail.clone())
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    pub fn window_volume(&self) -> f64 {
        self.cell_volume() * self.cell_count() as f64
    }

    pub fn window_lo(&self) -> &[f64] {
        &self.origin
    }

    pub fn window_hi(&self) -> Vec<f64> {
        (0..self.d)
            .map(|a| self.origin[a] + self.h * self.counts[a] as f64)
            .collect()
    }

    /// Norm-diameter of the window box.
    pub fn window_diameter(&self, norm: crate::num::Norm) -> f64 {
        let size: Vec<f64> = self.counts.iter().map(|&c| c as f64 * self.h).collect();
        norm.len(&size)
    }

    pub fn value(&self, flat: usize) -> &[f64] {
        let nu = self.ambient_dim();
        &self.values[flat * nu..(flat + 1) * nu]
    }

    pub fn value_point(&self, flat: usize) -> Point {
        Point(self.value(flat).to_vec())
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for a in 0..self.d {
            flat = flat * self.counts[a] + idx[a];
        }
        flat
    }

    pub fn unflatten(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.d];
        let mut rem = flat;
        for a in (0..self.d).rev() {
            idx[a] = rem % self.counts[a];
            rem /= self.counts[a];
        }
        idx
    }

    /// Midpoint of cell `idx`.
    pub fn cell_center(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.d)
            .map(|a| self.origin[a] + (idx[a] as f64 + 0.5) * self.h)
            .collect()
    }

    /// Cell containing x, or None outside the window. Cells are half-open
    /// boxes [origin + h i, origin + h (i+1)).
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut flat = 0usize;
        for a in 0..self.d {
            let t = (x[a] - self.origin[a]) / self.h;
            if t < 0.0 {
                return None;
            }
            let i = t.floor() as usize;
            if i >= self.counts[a] {
                return None;
            }
            flat = flat * self.counts[a] + i;
        }
        Some(flat)
    }

    /// u(x): the containing cell's value, tail outside the window.
    #[inline]
    pub fn value_at(&self, x: &[f64]) -> &[f64] {
        match self.cell_of(x) {
            Some(flat) => self.value(flat),
            None => &self.tail,
        }
    }

    /// True if windows, spacing, manifold and lattice phase all agree
    /// closely enough for cellwise pairing.
    pub fn same_geometry(&self, other: &GridMap) -> bool {
        self.d == other.d
            && self.manifold == other.manifold
            && (self.h - other.h).abs() <= 1e-12 * self.h
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .all(|(a, b)| ((a - b) / self.h - ((a - b) / self.h).round()).abs() < 1e-9)
    }

    pub fn to_json(&self) -> String {
        let repr = GridMapRepr::from(self);
        serde_json::to_string_pretty(&repr).expect("gridmap serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: GridMapRepr = serde_json::from_str(text)
            .map_err(|e| Error::schema(format!("gridmap json: {e}")))?;
        repr.into_gridmap()
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| Error::schema(format!("write {}: {e}", path.display())))
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::schema(format!("read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// On-disk schema: {d, origin, h, counts, manifold_id, tail, values}
/// with values a flat row-major array of nu-tuples.
#[derive(Serialize, Deserialize)]
struct GridMapRepr {
    d: usize,
    origin: Vec<f64>,
    h: f64,
    counts: Vec<usize>,
    manifold_id: String,
    tail: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl From<&GridMap> for GridMapRepr {
    fn from(g: &GridMap) -> Self {
        let nu = g.ambient_dim();
        GridMapRepr {
            d: g.d,
            origin: g.origin.clone(),
            h: g.h,
            counts: g.counts.clone(),
            manifold_id: g.manifold.id(),
            tail: g.tail.clone(),
            values: (0..g.cell_count())
                .map(|i| g.values[i * nu..(i + 1) * nu].to_vec())
                .collect(),
        }
    }
}

impl GridMapRepr {
    fn into_gridmap(self) -> Result<GridMap> {
        let manifold = Manifold::parse(&self.manifold_id)?;
        let nu = manifold.ambient_dim();
        if self.d != self.counts.len() {
            return Err(Error::schema(format!(
                "d = {} but counts has {} entries",
                self.d,
                self.counts.len()
            )));
        }
        let mut flat = Vec::with_capacity(self.values.len() * nu);
        for (i, tuple) in self.values.iter().enumerate() {
            if tuple.len() != nu {
                return Err(Error::schema(format!(
                    "value #{i} has {} coordinates, manifold {} expects {nu}",
                    tuple.len(),
                    self.manifold_id
                )));
            }
            flat.extend_from_slice(tuple);
        }
        GridMap::new(manifold, self.origin, self.h, self.counts, flat, self.tail)
    }
}
