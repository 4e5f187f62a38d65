//! Discretized maps on slabs R^d x (t_lo, t_hi): a (d+1)-dimensional
//! uniform grid with a constant lateral tail per transverse layer. The
//! transverse axis is the last one.

use crate::error::{Error, Result};
use crate::manifold::Manifold;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct SlabMap {
    manifold: Manifold,
    /// lower corner, length d+1
    origin: Vec<f64>,
    h: f64,
    /// cells per axis, length d+1
    counts: Vec<usize>,
    /// row-major over all d+1 axes, last (transverse) axis fastest
    values: Vec<f64>,
    /// lateral tail per transverse layer, counts[d] x nu
    tails: Vec<f64>,
}

impl SlabMap {
    pub fn new(
        manifold: Manifold,
        origin: Vec<f64>,
        h: f64,
        counts: Vec<usize>,
        values: Vec<f64>,
        tails: Vec<f64>,
    ) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::domain("a slab needs at least 2 axes"));
        }
        if origin.len() != counts.len() {
            return Err(Error::schema("slab origin/counts dimension mismatch".to_string()));
        }
        if !(h > 0.0) {
            return Err(Error::domain("slab spacing must be positive"));
        }
        let nu = manifold.ambient_dim();
        let ncells: usize = counts.iter().product();
        if values.len() != ncells * nu {
            return Err(Error::schema(format!(
                "slab values length {} does not match {} cells x {}",
                values.len(),
                ncells,
                nu
            )));
        }
        let nt = counts[counts.len() - 1];
        if tails.len() != nt * nu {
            return Err(Error::schema(format!(
                "slab needs one lateral tail per transverse layer ({} x {})",
                nt, nu
            )));
        }
        Ok(Self { manifold, origin, h, counts, values, tails })
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    /// Total dimension d+1.
    pub fn dim_total(&self) -> usize {
        self.counts.len()
    }

    /// Lateral dimension d.
    pub fn dim_lateral(&self) -> usize {
        self.counts.len() - 1
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

    pub fn t_lo(&self) -> f64 {
        self.origin[self.dim_total() - 1]
    }

    pub fn t_hi(&self) -> f64 {
        let a = self.dim_total() - 1;
        self.origin[a] + self.h * self.counts[a] as f64
    }

    pub fn t_layers(&self) -> usize {
        self.counts[self.dim_total() - 1]
    }

    pub fn layer_tail(&self, j: usize) -> &[f64] {
        let nu = self.ambient_dim();
        &self.tails[j * nu..(j + 1) * nu]
    }

    pub fn value(&self, flat: usize) -> &[f64] {
        let nu = self.ambient_dim();
        &self.values[flat * nu..(flat + 1) * nu]
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for a in 0..self.dim_total() {
            flat = flat * self.counts[a] + idx[a];
        }
        flat
    }

    pub fn unflatten(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dim_total()];
        let mut rem = flat;
        for a in (0..self.dim_total()).rev() {
            idx[a] = rem % self.counts[a];
            rem /= self.counts[a];
        }
        idx
    }

    pub fn cell_center(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.dim_total())
            .map(|a| self.origin[a] + (idx[a] as f64 + 0.5) * self.h)
            .collect()
    }

    /// Value at a point of the slab: lateral overflow falls back to the
    /// layer tail, transverse overflow is a domain error.
    pub fn value_at(&self, x: &[f64]) -> Result<&[f64]> {
        let dt = self.dim_total();
        let ta = dt - 1;
        let tj = (x[ta] - self.origin[ta]) / self.h;
        if tj < 0.0 || tj >= self.counts[ta] as f64 {
            return Err(Error::domain(format!(
                "transverse coordinate {} outside the slab ({}, {})",
                x[ta],
                self.t_lo(),
                self.t_hi()
            )));
        }
        let tj = tj.floor() as usize;
        let mut flat = 0usize;
        for a in 0..dt - 1 {
            let i = (x[a] - self.origin[a]) / self.h;
            if i < 0.0 || i >= self.counts[a] as f64 {
                return Ok(self.layer_tail(tj));
            }
            flat = flat * self.counts[a] + i.floor() as usize;
        }
        flat = flat * self.counts[ta] + tj;
        Ok(self.value(flat))
    }

    /// Copy with the transverse origin moved to t0 (used to report a strip
    /// built on (-L, L) as a half-space layer on (0, 2L)).
    pub fn with_transverse_origin(&self, t0: f64) -> SlabMap {
        let mut out = self.clone();
        let a = out.dim_total() - 1;
        out.origin[a] = t0;
        out
    }

    /// Lateral restriction to the box [lo, hi): cells wholly inside are
    /// kept, the tails are unchanged.
    pub fn restrict_lateral(&self, lo: &[f64], hi: &[f64]) -> Result<SlabMap> {
        let d = self.dim_lateral();
        if lo.len() != d || hi.len() != d {
            return Err(Error::domain("restriction box has wrong dimension"));
        }
        let mut ilo = vec![0usize; d];
        let mut ihi = vec![0usize; d];
        for a in 0..d {
            let flo = (lo[a] - self.origin[a]) / self.h;
            let fhi = (hi[a] - self.origin[a]) / self.h;
            if flo < -1e-9 || fhi > self.counts[a] as f64 + 1e-9 || fhi <= flo {
                return Err(Error::domain(format!(
                    "restriction box [{}, {}) outside the slab on axis {a}",
                    lo[a], hi[a]
                )));
            }
            ilo[a] = flo.round().max(0.0) as usize;
            ihi[a] = fhi.round().min(self.counts[a] as f64) as usize;
        }
        let nu = self.ambient_dim();
        let mut counts: Vec<usize> = (0..d).map(|a| ihi[a] - ilo[a]).collect();
        counts.push(self.t_layers());
        let mut origin: Vec<f64> =
            (0..d).map(|a| self.origin[a] + ilo[a] as f64 * self.h).collect();
        origin.push(self.t_lo());
        let ncells: usize = counts.iter().product();
        let mut values = Vec::with_capacity(ncells * nu);
        let mut idx = vec![0usize; d + 1];
        for flat in 0..ncells {
            let mut rem = flat;
            for a in (0..=d).rev() {
                idx[a] = rem % counts[a];
                rem /= counts[a];
            }
            let mut src = vec![0usize; d + 1];
            for a in 0..d {
                src[a] = idx[a] + ilo[a];
            }
            src[d] = idx[d];
            values.extend_from_slice(self.value(self.flatten(&src)));
        }
        SlabMap::new(self.manifold.clone(), origin, self.h, counts, values, self.tails.clone())
    }

    pub fn to_json(&self) -> String {
        let nu = self.ambient_dim();
        let repr = SlabMapRepr {
            d: self.dim_total(),
            origin: self.origin.clone(),
            h: self.h,
            counts: self.counts.clone(),
            manifold_id: self.manifold.id(),
            tail: (0..self.t_layers())
                .map(|j| self.layer_tail(j).to_vec())
                .collect(),
            values: (0..self.cell_count())
                .map(|i| self.values[i * nu..(i + 1) * nu].to_vec())
                .collect(),
        };
        serde_json::to_string(&repr).expect("slab serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: SlabMapRepr =
            serde_json::from_str(text).map_err(|e| Error::schema(format!("slab json: {e}")))?;
        let manifold = Manifold::parse(&repr.manifold_id)?;
        let nu = manifold.ambient_dim();
        let mut values = Vec::with_capacity(repr.values.len() * nu);
        for (i, t) in repr.values.iter().enumerate() {
            if t.len() != nu {
                return Err(Error::schema(format!("slab value #{i} has arity {}", t.len())));
            }
            values.extend_from_slice(t);
        }
        let mut tails = Vec::with_capacity(repr.tail.len() * nu);
        for t in &repr.tail {
            if t.len() != nu {
                return Err(Error::schema("slab tail arity mismatch".to_string()));
            }
            tails.extend_from_slice(t);
        }
        SlabMap::new(manifold, repr.origin, repr.h, repr.counts, values, tails)
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

/// Same schema as grid maps with d+1 axes; the tail is per transverse layer.
#[derive(Serialize, Deserialize)]
struct SlabMapRepr {
    d: usize,
    origin: Vec<f64>,
    h: f64,
    counts: Vec<usize>,
    manifold_id: String,
    tail: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_round_trip() {
        let m = Manifold::euclidean(1).unwrap();
        // 2 lateral x 2 transverse cells on [0,1) x [0,1)
        let values = vec![0.0, 1.0, 2.0, 3.0];
        let tails = vec![-1.0, -2.0];
        let slab = SlabMap::new(m, vec![0.0, 0.0], 0.5, vec![2, 2], values, tails).unwrap();
        assert_eq!(slab.value_at(&[0.25, 0.25]).unwrap(), &[0.0]);
        assert_eq!(slab.value_at(&[0.25, 0.75]).unwrap(), &[1.0]);
        assert_eq!(slab.value_at(&[0.75, 0.25]).unwrap(), &[2.0]);
        // lateral overflow -> layer tail
        assert_eq!(slab.value_at(&[5.0, 0.25]).unwrap(), &[-1.0]);
        assert_eq!(slab.value_at(&[5.0, 0.75]).unwrap(), &[-2.0]);
        // transverse overflow -> domain error
        assert!(slab.value_at(&[0.25, 3.0]).is_err());

        let back = SlabMap::from_json(&slab.to_json()).unwrap();
        assert_eq!(back.values_flat(), slab.values_flat());
        assert_eq!(back.layer_tail(1), slab.layer_tail(1));
    }
}
