//! Summation and small numeric helpers shared by the energy kernels.
//!
//! Every reduction that feeds a report goes through compensated summation
//! over a deterministically ordered sequence, so results are independent of
//! thread count and reduction order well below the 1e-12 relative target.

use rayon::prelude::*;

/// Neumaier variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a sequential iterator.
pub fn csum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in it {
        acc.add(x);
    }
    acc.value()
}

/// Deterministic parallel sum: `f(i)` is evaluated for `i in 0..n` in
/// parallel, partial results are collected in index order and folded
/// sequentially with compensation. The result does not depend on the
/// number of worker threads.
pub fn par_sum(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    if n < 64 {
        return csum((0..n).map(f));
    }
    let parts: Vec<f64> = (0..n).into_par_iter().map(f).collect();
    csum(parts)
}

/// Cubic smoothstep on [0, 1]: s(0) = 0, s(1) = 1, max slope 3/2 at 1/2.
/// Clamps outside the unit interval.
#[inline]
pub fn smoothstep01(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Volume of the d-dimensional Euclidean unit ball, by the two-step
/// recursion V_d = 2*pi/d * V_{d-2}.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Which norm cuts off the nonlocal double integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// `|x - y| <= R`, normalizer Leb(B^d(0,R)).
    Euclidean,
    /// `|x - y|_inf <= R`, normalizer (2R)^d.
    Sup,
}

impl Norm {
    #[inline]
    pub fn len(&self, v: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Sup => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }
    }

    /// Measure of the radius-R ball of this norm in dimension d.
    pub fn ball_volume(&self, d: usize, r: f64) -> f64 {
        match self {
            Norm::Euclidean => unit_ball_volume(d) * r.powi(d as i32),
            Norm::Sup => (2.0 * r).powi(d as i32),
        }
    }
}

/// `a/b` treating a zero numerator as an exact zero even when `b = 0`.
/// Used for "ratio reported as 0" cases on identically-zero energies.
pub fn safe_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Serde helper for f64 fields that may legitimately be +-infinity
/// (JSON has no literal for it): finite values serialize as numbers,
/// infinities as the strings "inf" / "-inf".
pub mod serde_extended_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!("bad float string {other:?}"))),
            },
        }
    }
}

/// Round a float that is known to sit on an integer (lattice arithmetic)
/// and assert the drift is negligible.
pub fn exact_int(x: f64, what: &str) -> crate::error::Result<i64> {
    let r = x.round();
    if (x - r).abs() > 1e-9 * (1.0 + x.abs()) {
        return Err(crate::error::Error::resolution(format!(
            "{what}: {x} is not within tolerance of an integer"
        )));
    }
    Ok(r as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        // 1 + 1e-16 repeated: naive summation loses the tail entirely.
        let n = 1_000_000usize;
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..n {
            acc.add(1e-16);
        }
        let expected = 1.0 + n as f64 * 1e-16;
        assert!((acc.value() - expected).abs() < 1e-12);
    }

    #[test]
    fn par_sum_is_thread_count_independent() {
        let f = |i: usize| ((i * 2654435761) % 1000) as f64 * 1e-7 + 1.0;
        let serial = csum((0..10_000).map(f));
        let parallel = par_sum(10_000, f);
        assert_eq!(serial, parallel);
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(Norm::Sup.ball_volume(2, 3.0), 36.0);
    }

    #[test]
    fn smoothstep_endpoints_and_slope() {
        assert_eq!(smoothstep01(0.0), 0.0);
        assert_eq!(smoothstep01(1.0), 1.0);
        assert_eq!(smoothstep01(0.5), 0.5);
        // max slope 3/2 at midpoint
        let eps = 1e-6;
        let slope = (smoothstep01(0.5 + eps) - smoothstep01(0.5 - eps)) / (2.0 * eps);
        assert!((slope - 1.5).abs() < 1e-9);
    }
}
