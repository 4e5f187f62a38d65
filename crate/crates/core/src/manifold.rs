//! Embedded target manifolds N in R^nu with exact geodesic distance and
//! constant-speed geodesic paths.
//!
//! Supported targets: Euclidean space, the unit circle S^1 in R^2 and unit
//! spheres S^{nu-1} in R^nu. All have closed-form distances and geodesics,
//! so no ODE solves are needed anywhere downstream.

use crate::error::{Error, Result};
use crate::num::smoothstep01;
use serde::{Deserialize, Serialize};

/// Default membership tolerance; leaves headroom over double-precision
/// round-trip error of normalization.
pub const DEFAULT_ON_MANIFOLD_TOL: f64 = 1e-9;

/// A point of the embedding space R^nu, expected to lie on the manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    /// R^nu with the Euclidean distance.
    Euclidean(usize),
    /// Unit circle in R^2 with arc-length distance.
    Circle,
    /// Unit sphere S^{nu-1} in R^nu, nu >= 2, arc-length distance.
    Sphere(usize),
}

/// Target manifold descriptor: the kind plus a membership tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    kind: ManifoldKind,
    on_manifold_tol: f64,
}

impl Manifold {
    pub fn euclidean(nu: usize) -> Result<Self> {
        if nu == 0 {
            return Err(Error::domain("euclidean target needs dimension >= 1"));
        }
        Ok(Self { kind: ManifoldKind::Euclidean(nu), on_manifold_tol: DEFAULT_ON_MANIFOLD_TOL })
    }

    pub fn circle() -> Self {
        Self { kind: ManifoldKind::Circle, on_manifold_tol: DEFAULT_ON_MANIFOLD_TOL }
    }

    pub fn sphere(nu: usize) -> Result<Self> {
        if nu < 2 {
            return Err(Error::domain("sphere target needs ambient dimension >= 2"));
        }
        Ok(Self { kind: ManifoldKind::Sphere(nu), on_manifold_tol: DEFAULT_ON_MANIFOLD_TOL })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::domain("on_manifold_tol must be positive"));
        }
        self.on_manifold_tol = tol;
        Ok(self)
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn tolerance(&self) -> f64 {
        self.on_manifold_tol
    }

    /// Ambient (embedding) dimension nu.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Euclidean(nu) => nu,
            ManifoldKind::Circle => 2,
            ManifoldKind::Sphere(nu) => nu,
        }
    }

    /// String id used in CLI and config files: "euclidean:nu", "circle",
    /// "sphere:nu".
    pub fn id(&self) -> String {
        match self.kind {
            ManifoldKind::Euclidean(nu) => format!("euclidean:{nu}"),
            ManifoldKind::Circle => "circle".to_string(),
            ManifoldKind::Sphere(nu) => format!("sphere:{nu}"),
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        if id == "circle" {
            return Ok(Self::circle());
        }
        if let Some(rest) = id.strip_prefix("euclidean:") {
            let nu: usize = rest
                .parse()
                .map_err(|_| Error::schema(format!("bad manifold id {id:?}")))?;
            return Self::euclidean(nu);
        }
        if let Some(rest) = id.strip_prefix("sphere:") {
            let nu: usize = rest
                .parse()
                .map_err(|_| Error::schema(format!("bad manifold id {id:?}")))?;
            return Self::sphere(nu);
        }
        Err(Error::schema(format!(
            "unknown manifold id {id:?} (expected euclidean:nu, circle or sphere:nu)"
        )))
    }

    fn is_round(&self) -> bool {
        !matches!(self.kind, ManifoldKind::Euclidean(_))
    }

    pub fn is_on(&self, p: &[f64]) -> bool {
        if p.len() != self.ambient_dim() {
            return false;
        }
        if self.is_round() {
            let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            (norm - 1.0).abs() <= self.on_manifold_tol
        } else {
            p.iter().all(|x| x.is_finite())
        }
    }

    pub fn check_on(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.ambient_dim() {
            return Err(Error::domain(format!(
                "point has {} coordinates, manifold {} expects {}",
                p.len(),
                self.id(),
                self.ambient_dim()
            )));
        }
        if !self.is_on(p) {
            return Err(Error::domain(format!(
                "point {:?} is off the manifold {} beyond tolerance {}",
                p,
                self.id(),
                self.on_manifold_tol
            )));
        }
        Ok(())
    }

    /// Geodesic distance kernel without membership checks. This is the hot
    /// path of every pairwise energy sum.
    ///
    /// For round targets the arc length is computed as 2 asin(|a-b|/2),
    /// which is exact for unit vectors and returns exactly 0 for identical
    /// inputs (acos of a rounded dot product does not).
    #[inline]
    pub fn dist_slice(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean(_) => {
                let mut s = 0.0;
                for i in 0..a.len() {
                    let d = a[i] - b[i];
                    s += d * d;
                }
                s.sqrt()
            }
            ManifoldKind::Circle | ManifoldKind::Sphere(_) => {
                let mut s = 0.0;
                for i in 0..a.len() {
                    let d = a[i] - b[i];
                    s += d * d;
                }
                let half_chord = 0.5 * s.sqrt();
                2.0 * half_chord.clamp(-1.0, 1.0).asin()
            }
        }
    }

    /// Geodesic distance with membership checks.
    pub fn dist(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check_on(a.coords())?;
        self.check_on(b.coords())?;
        Ok(self.dist_slice(a.coords(), b.coords()))
    }

    /// Point at fraction `s` in [0, 1] along the minimal geodesic from a
    /// to b. Sphere geodesics use spherical linear interpolation; an
    /// antipodal pair has no unique minimal geodesic and is rejected.
    pub fn geodesic_point(&self, a: &[f64], b: &[f64], s: f64) -> Result<Vec<f64>> {
        match self.kind {
            ManifoldKind::Euclidean(_) => {
                Ok(a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect())
            }
            ManifoldKind::Circle | ManifoldKind::Sphere(_) => {
                let sum_norm: f64 = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x + y) * (x + y))
                    .sum::<f64>()
                    .sqrt();
                if sum_norm < 1e-9 {
                    return Err(Error::domain(
                        "non-unique geodesic: endpoints are antipodal on the sphere; perturb one endpoint",
                    ));
                }
                let theta = self.dist_slice(a, b);
                if theta < 1e-14 {
                    return Ok(a.to_vec());
                }
                let sin_theta = theta.sin();
                let wa = ((1.0 - s) * theta).sin() / sin_theta;
                let wb = (s * theta).sin() / sin_theta;
                let mut out: Vec<f64> = a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect();
                // renormalize to kill accumulated rounding
                let n = out.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in &mut out {
                    *x /= n;
                }
                Ok(out)
            }
        }
    }

    /// Two-sided interpolation profile: gamma(t) = a for t <= -1,
    /// gamma(t) = b for t >= 1, speed at most (3/4) dist(a,b) everywhere.
    /// Realized as the minimal geodesic reparametrized by a cubic
    /// smoothstep over [-1, 1].
    pub fn geodesic_profile(&self, a: &Point, b: &Point, t: f64) -> Result<Point> {
        self.check_on(a.coords())?;
        self.check_on(b.coords())?;
        let s = smoothstep01((t + 1.0) / 2.0);
        Ok(Point(self.geodesic_point(a.coords(), b.coords(), s)?))
    }

    /// One-sided profile: gamma(0) = a exactly, gamma(t) = b for t >= 1,
    /// speed at most (3/2) dist(a,b) <= 2 dist(a,b).
    pub fn one_sided_profile(&self, a: &Point, b: &Point, t: f64) -> Result<Point> {
        self.check_on(a.coords())?;
        self.check_on(b.coords())?;
        if t < 0.0 {
            return Err(Error::domain("one_sided_profile requires t >= 0"));
        }
        let s = smoothstep01(t);
        Ok(Point(self.geodesic_point(a.coords(), b.coords(), s)?))
    }

    /// Unchecked profile kernels for the smoothing hot path.
    #[inline]
    pub(crate) fn profile_value(&self, a: &[f64], b: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        let s = smoothstep01((t + 1.0) / 2.0);
        let p = self.geodesic_point(a, b, s)?;
        out.copy_from_slice(&p);
        Ok(())
    }

    #[inline]
    pub(crate) fn one_sided_value(&self, a: &[f64], b: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        let s = smoothstep01(t.max(0.0));
        let p = self.geodesic_point(a, b, s)?;
        out.copy_from_slice(&p);
        Ok(())
    }

    /// Nearest-point projection onto the manifold, used for test-data
    /// generation. Sphere: x/|x|; Euclidean: identity.
    pub fn project(&self, x: &[f64]) -> Result<Point> {
        if x.len() != self.ambient_dim() {
            return Err(Error::domain(format!(
                "project: got {} coordinates, expected {}",
                x.len(),
                self.ambient_dim()
            )));
        }
        match self.kind {
            ManifoldKind::Euclidean(_) => Ok(Point(x.to_vec())),
            ManifoldKind::Circle | ManifoldKind::Sphere(_) => {
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n == 0.0 {
                    return Err(Error::domain(
                        "project: zero vector has no nearest point on the sphere",
                    ));
                }
                Ok(Point(x.iter().map(|v| v / n).collect()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn manifolds() -> Vec<Manifold> {
        vec![
            Manifold::euclidean(2).unwrap(),
            Manifold::circle(),
            Manifold::sphere(3).unwrap(),
        ]
    }

    fn random_point(m: &Manifold, rng: &mut ChaCha8Rng) -> Point {
        let nu = m.ambient_dim();
        loop {
            let v: Vec<f64> = (0..nu).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if v.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-3 {
                return m.project(&v).unwrap();
            }
        }
    }

    #[test]
    fn dist_examples() {
        let e2 = Manifold::euclidean(2).unwrap();
        let d = e2
            .dist(&Point(vec![0.0, 0.0]), &Point(vec![3.0, 4.0]))
            .unwrap();
        assert_eq!(d, 5.0);

        let s3 = Manifold::sphere(3).unwrap();
        let antipodal = s3
            .dist(&Point(vec![1.0, 0.0, 0.0]), &Point(vec![-1.0, 0.0, 0.0]))
            .unwrap();
        assert!((antipodal - std::f64::consts::PI).abs() < 1e-15);
        let quarter = s3
            .dist(&Point(vec![1.0, 0.0, 0.0]), &Point(vec![0.0, 1.0, 0.0]))
            .unwrap();
        assert!((quarter - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn dist_of_identical_points_is_exactly_zero() {
        let s3 = Manifold::sphere(3).unwrap();
        let p = s3.project(&[0.3, -0.2, 0.9]).unwrap();
        assert_eq!(s3.dist(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn triangle_inequality_random_triples() {
        for m in manifolds() {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..1000 {
                let a = random_point(&m, &mut rng);
                let b = random_point(&m, &mut rng);
                let c = random_point(&m, &mut rng);
                let ab = m.dist(&a, &b).unwrap();
                let bc = m.dist(&b, &c).unwrap();
                let ac = m.dist(&a, &c).unwrap();
                assert!(ac <= ab + bc + 1e-12, "triangle violated on {}", m.id());
                assert!(ab >= 0.0);
                let ba = m.dist(&b, &a).unwrap();
                assert_eq!(ab, ba);
            }
        }
    }

    #[test]
    fn profile_examples() {
        let e1 = Manifold::euclidean(1).unwrap();
        let a = Point(vec![0.0]);
        let b = Point(vec![1.0]);
        let mid = e1.geodesic_profile(&a, &b, 0.0).unwrap();
        assert_eq!(mid.0[0], 0.5);
        assert_eq!(e1.geodesic_profile(&a, &b, -1.0).unwrap().0[0], 0.0);
        assert_eq!(e1.geodesic_profile(&a, &b, 1.5).unwrap().0[0], 1.0);
        assert_eq!(e1.one_sided_profile(&a, &b, 0.0).unwrap().0[0], 0.0);
        assert_eq!(e1.one_sided_profile(&a, &b, 1.0).unwrap().0[0], 1.0);

        let s3 = Manifold::sphere(3).unwrap();
        let p = Point(vec![1.0, 0.0, 0.0]);
        let q = Point(vec![0.0, 1.0, 0.0]);
        let mid = s3.geodesic_profile(&p, &q, 0.0).unwrap();
        let inv = 1.0 / 2.0f64.sqrt();
        assert!((mid.0[0] - inv).abs() < 1e-15);
        assert!((mid.0[1] - inv).abs() < 1e-15);
        assert_eq!(mid.0[2], 0.0);

        // degenerate pair: a == b
        let same = s3.geodesic_profile(&p, &p, 0.37).unwrap();
        assert_eq!(same.0, p.0);
    }

    #[test]
    fn antipodal_rejected() {
        let s3 = Manifold::sphere(3).unwrap();
        let p = Point(vec![1.0, 0.0, 0.0]);
        let q = Point(vec![-1.0, 0.0, 0.0]);
        let err = s3.geodesic_profile(&p, &q, 0.0).unwrap_err();
        assert!(err.to_string().contains("non-unique geodesic"));
    }

    #[test]
    fn profile_speed_bounds() {
        for m in manifolds() {
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            for _ in 0..50 {
                let a = random_point(&m, &mut rng);
                let b = random_point(&m, &mut rng);
                let d = m.dist(&a, &b).unwrap();
                if d > std::f64::consts::PI - 1e-3 {
                    continue; // close to antipodal, no unique geodesic
                }
                let n = 64;
                for j in 0..n {
                    let t0 = -1.2 + 2.4 * j as f64 / n as f64;
                    let t1 = t0 + 2.4 / n as f64;
                    let p0 = m.geodesic_profile(&a, &b, t0).unwrap();
                    let p1 = m.geodesic_profile(&a, &b, t1).unwrap();
                    let speed = m.dist(&p0, &p1).unwrap() / (t1 - t0);
                    assert!(speed <= d * (1.0 + 1e-6), "two-sided speed {speed} > {d}");

                    let u0 = 2.4 * j as f64 / n as f64 / 2.0;
                    let u1 = u0 + 1.2 / n as f64;
                    let q0 = m.one_sided_profile(&a, &b, u0).unwrap();
                    let q1 = m.one_sided_profile(&a, &b, u1).unwrap();
                    let speed1 = m.dist(&q0, &q1).unwrap() / (u1 - u0);
                    assert!(speed1 <= 2.0 * d * (1.0 + 1e-6), "one-sided speed {speed1} > {}", 2.0 * d);
                }
            }
        }
    }

    #[test]
    fn profile_path_length_matches_distance() {
        for m in manifolds() {
            let mut rng = ChaCha8Rng::seed_from_u64(29);
            for _ in 0..20 {
                let a = random_point(&m, &mut rng);
                let b = random_point(&m, &mut rng);
                let d = m.dist(&a, &b).unwrap();
                if d > std::f64::consts::PI - 1e-3 || d < 1e-9 {
                    continue;
                }
                let n = 256;
                let mut len = 0.0;
                let mut prev = m.geodesic_profile(&a, &b, -1.0).unwrap();
                for j in 1..=n {
                    let t = -1.0 + 2.0 * j as f64 / n as f64;
                    let p = m.geodesic_profile(&a, &b, t).unwrap();
                    len += m.dist(&prev, &p).unwrap();
                    prev = p;
                }
                assert!((len - d).abs() <= 1e-6 * d, "path length {len} vs dist {d}");
            }
        }
    }

    #[test]
    fn project_examples() {
        let s3 = Manifold::sphere(3).unwrap();
        assert_eq!(s3.project(&[2.0, 0.0, 0.0]).unwrap().0, vec![1.0, 0.0, 0.0]);
        assert!(s3.project(&[0.0, 0.0, 0.0]).is_err());
        let c = Manifold::circle();
        let p = c.project(&[1.0, 1.0]).unwrap();
        let inv = 1.0 / 2.0f64.sqrt();
        assert!((p.0[0] - inv).abs() < 1e-15 && (p.0[1] - inv).abs() < 1e-15);
        let e3 = Manifold::euclidean(3).unwrap();
        assert_eq!(e3.project(&[4.0, -1.0, 0.5]).unwrap().0, vec![4.0, -1.0, 0.5]);
    }

    #[test]
    fn id_round_trip() {
        for m in manifolds() {
            let id = m.id();
            let back = Manifold::parse(&id).unwrap();
            assert_eq!(back.id(), id);
        }
        assert!(Manifold::parse("torus").is_err());
        assert!(Manifold::parse("sphere:1").is_err());
    }
}
