//! Hyperbolic geometry: exact formulas for half-planes and disk complements,
//! and one-sided density bounds for general domains.
//!
//! Bounds of the form `K |z - a| (1 + |log(|b - a| / |z - a|)|)` carry an
//! unspecified universal constant `K`; callers pass it explicitly and results
//! hold only up to that constant.

use serde::Serialize;

use crate::catalog::LogLift;
use crate::complex::{ensure_finite, ComplexValue};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    HalfPlaneExact,
    /// `[1/(2d), 2/d]`; the lower end assumes a simply connected domain.
    StandardEstimate,
    TwoPuncture,
    /// `rho <= 2/d`, valid for every hyperbolic domain.
    InscribedDisk,
    PuncturedSequence,
    /// Exact density of `{|w| > r}`.
    DiskComplementExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityBound {
    pub lower: f64,
    pub upper: f64,
    pub method: DensityMethod,
}

impl DensityBound {
    pub fn contains(&self, rho: f64) -> bool {
        self.lower <= rho && rho <= self.upper
    }
}

/// Density `1/(Re z - Q)` of `{Re > Q}`.
pub fn rho_half_plane(q: f64, z: ComplexValue) -> Result<f64> {
    ensure_finite(z, "z")?;
    let d = z.re - q;
    if !(d > 0.0) {
        return Err(Error::Range(format!("{z} is not in Re > {q}")));
    }
    Ok(1.0 / d)
}

pub fn half_plane_density(q: f64, z: ComplexValue) -> Result<DensityBound> {
    let rho = rho_half_plane(q, z)?;
    Ok(DensityBound { lower: rho, upper: rho, method: DensityMethod::HalfPlaneExact })
}

/// Hyperbolic distance in `{Re > Q}` (curvature -1 normalization with
/// density `1/(Re - Q)`).
pub fn dist_half_plane(q: f64, z: ComplexValue, w: ComplexValue) -> Result<f64> {
    rho_half_plane(q, z)?;
    rho_half_plane(q, w)?;
    let denom = 2.0 * ((z.re - q) * (w.re - q)).sqrt();
    Ok(2.0 * ((z - w).norm() / denom).asinh())
}

/// `[1/(2d), 2/d]` for a point at distance `d` from the boundary.
pub fn standard_estimate_bound(d: f64) -> Result<DensityBound> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Range(format!("boundary distance must be positive, got {d}")));
    }
    Ok(DensityBound { lower: 0.5 / d, upper: 2.0 / d, method: DensityMethod::StandardEstimate })
}

/// `[0, 2/d]`, valid without simple connectivity.
pub fn inscribed_disk_bound(d: f64) -> Result<DensityBound> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Range(format!("boundary distance must be positive, got {d}")));
    }
    Ok(DensityBound { lower: 0.0, upper: 2.0 / d, method: DensityMethod::InscribedDisk })
}

/// Upper bound for `1/rho` of the plane punctured at `a` and `b`, evaluated
/// at `z`. The nearer puncture plays the role of `a`.
pub fn two_puncture_upper(a: ComplexValue, b: ComplexValue, z: ComplexValue, k: f64) -> Result<f64> {
    for (name, v) in [("a", a), ("b", b), ("z", z)] {
        ensure_finite(v, name)?;
    }
    if !(k > 0.0) {
        return Err(Error::Range(format!("K must be positive, got {k}")));
    }
    if a == b || z == a || z == b {
        return Err(Error::Range("punctures and evaluation point must be distinct".into()));
    }
    let (a, b) = if (z - a).norm() <= (z - b).norm() { (a, b) } else { (b, a) };
    let za = (z - a).norm();
    Ok(k * za * (1.0 + ((b - a).norm() / za).ln().abs()))
}

/// `{0} ∪ {w_j}` with `|w_{j+1}| <= C |w_j|`.
#[derive(Clone, Debug, PartialEq)]
pub struct PunctureSequence {
    points: Vec<ComplexValue>,
    ratio: f64,
}

impl PunctureSequence {
    pub fn new(points: Vec<ComplexValue>, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::Range(format!("ratio C must exceed 1, got {ratio}")));
        }
        if points.is_empty() {
            return Err(Error::Range("need at least one nonzero puncture".into()));
        }
        for (j, w) in points.iter().enumerate() {
            ensure_finite(*w, "puncture")?;
            if w.norm() == 0.0 {
                return Err(Error::Range(format!("puncture w_{j} is 0, which is already included")));
            }
        }
        for j in 1..points.len() {
            if points[j].norm() > ratio * points[j - 1].norm() * (1.0 + 1e-12) {
                return Err(Error::Range(format!("|w_{j}| > C |w_{}|", j - 1)));
            }
        }
        Ok(Self { points, ratio })
    }

    /// `w_j = first * C^j` for `j < count`.
    pub fn geometric(first: ComplexValue, ratio: f64, count: usize) -> Result<Self> {
        let points = (0..count).map(|j| first * ratio.powi(j as i32)).collect();
        Self::new(points, ratio)
    }

    pub fn points(&self) -> &[ComplexValue] {
        &self.points
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }
}

/// Which selection of the two punctures produced a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PunctureCase {
    /// Nearest puncture is 0.
    NearestIsOrigin,
    /// `|z - a| > |a|/2`.
    FarFromNearest,
    /// `|z - a| <= |a|/2`; the second puncture is 0.
    CloseToNearest,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PuncturedBound {
    pub bound: f64,
    pub case: PunctureCase,
    pub a: ComplexValue,
    pub b: ComplexValue,
}

/// Upper bound for `1/rho_V(z)` on the complement of `{0} ∪ {w_j}`, choosing
/// the pair of punctures by the three-case rule. Ties for the nearest puncture
/// go to 0, then to the earliest `w_j`.
pub fn punctured_sequence_upper(punctures: &PunctureSequence, z: ComplexValue, k: f64) -> Result<PuncturedBound> {
    ensure_finite(z, "z")?;
    let pts = punctures.points();
    if z.norm() < pts[0].norm() {
        return Err(Error::Range(format!("|z| = {} is below |w_0|", z.norm())));
    }
    let zero = ComplexValue::new(0.0, 0.0);
    let mut a = zero;
    let mut best = z.norm();
    for w in pts {
        let d = (z - w).norm();
        if d < best {
            best = d;
            a = *w;
        }
    }
    if best == 0.0 {
        return Err(Error::Range(format!("{z} is a puncture")));
    }
    let first_beyond = |r: f64| -> Result<ComplexValue> {
        pts.iter()
            .copied()
            .find(|w| w.norm() >= r && *w != a)
            .ok_or_else(|| Error::Range(format!("puncture list ends before modulus {r}; extend it")))
    };
    let (b, case) = if a == zero {
        (first_beyond(z.norm())?, PunctureCase::NearestIsOrigin)
    } else if best > a.norm() / 2.0 {
        (first_beyond(3.0 * best)?, PunctureCase::FarFromNearest)
    } else {
        (zero, PunctureCase::CloseToNearest)
    };
    let bound = two_puncture_upper(a, b, z, k)?;
    Ok(PuncturedBound { bound, case, a, b })
}

/// Exact density of `{|w| > r}`: `1 / (|w| log(|w|/r))`.
pub fn disk_complement_density(r: f64, w: ComplexValue) -> Result<f64> {
    ensure_finite(w, "w")?;
    if !(r > 0.0) {
        return Err(Error::Range(format!("radius must be positive, got {r}")));
    }
    let m = w.norm();
    if !(m > r) {
        return Err(Error::Range(format!("|{w}| <= {r}")));
    }
    Ok(1.0 / (m * (m / r).ln()))
}

/// `|F'(z)| (Re z - Q) / (Re F(z) - Q)`, the derivative of `F` measured in the
/// half-plane metric on both sides.
pub fn hyperbolic_derivative<M: LogLift + ?Sized>(model: &M, z: ComplexValue) -> Result<f64> {
    let q = model.half_plane();
    let w = model.eval_f(z)?;
    let d = model.eval_df(z)?.norm();
    Ok(d * rho_half_plane(q, w)? / rho_half_plane(q, z)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::LogLiftModel;
    use crate::complex::c;
    use proptest::prelude::*;

    #[test]
    fn half_plane_examples() {
        assert_eq!(rho_half_plane(0.0, c(1.0, 0.0)).unwrap(), 1.0);
        assert_eq!(rho_half_plane(0.0, c(2.0, 5.0)).unwrap(), 0.5);
        assert_eq!(rho_half_plane(2.0, c(3.0, 0.0)).unwrap(), 1.0);
        assert!(rho_half_plane(2.0, c(2.0, 0.0)).is_err());

        let d12 = dist_half_plane(0.0, c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        assert!((d12 - 2f64.ln()).abs() < 1e-15);
        assert_eq!(dist_half_plane(0.0, c(5.0, 3.0), c(5.0, 3.0)).unwrap(), 0.0);
        let d14 = dist_half_plane(0.0, c(1.0, 0.0), c(4.0, 0.0)).unwrap();
        let d24 = dist_half_plane(0.0, c(2.0, 0.0), c(4.0, 0.0)).unwrap();
        assert!((d14 - 4f64.ln()).abs() < 1e-15);
        assert!((d12 + d24 - d14).abs() < 1e-15);
        assert!(dist_half_plane(0.0, c(-1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn standard_estimate_examples() {
        let b = standard_estimate_bound(1.0).unwrap();
        assert_eq!((b.lower, b.upper), (0.5, 2.0));
        let b2 = standard_estimate_bound(2.0).unwrap();
        assert_eq!((b2.lower, b2.upper), (0.25, 1.0));
        assert_eq!(b.method, DensityMethod::StandardEstimate);
        assert!(standard_estimate_bound(0.0).is_err());
        assert!(b2.contains(rho_half_plane(1.0, c(3.0, 7.0)).unwrap()));
        let d = inscribed_disk_bound(2.0).unwrap();
        assert_eq!((d.lower, d.upper), (0.0, 1.0));
    }

    #[test]
    fn two_puncture_examples() {
        let v = two_puncture_upper(c(0.0, 0.0), c(4.0, 0.0), c(2.0, 0.0), 1.0).unwrap();
        assert!((v - 3.386294361119891).abs() < 1e-12);
        let z = c(1e6, 0.0);
        let v = two_puncture_upper(c(0.0, 0.0), c(1.0, 0.0), z, 1.0).unwrap();
        let zb = 999_999.0f64;
        assert!((v - zb * (1.0 + (1.0 / zb).ln().abs())).abs() < 1e-6);
        assert!(v > 1e6 * 13.0);
        let near = two_puncture_upper(c(0.0, 0.0), c(4.0, 0.0), c(2.0, 0.001), 1.0).unwrap();
        assert!((near - 3.386294361119891).abs() < 0.01);
        assert!(two_puncture_upper(c(0.0, 0.0), c(4.0, 0.0), c(4.0, 0.0), 1.0).is_err());
    }

    fn powers_of_two(count: usize) -> PunctureSequence {
        PunctureSequence::geometric(c(2.0, 0.0), 2.0, count).unwrap()
    }

    #[test]
    fn punctured_sequence_examples() {
        let p = powers_of_two(40);
        let r = punctured_sequence_upper(&p, c(3.0, 0.0), 1.0).unwrap();
        assert_eq!(r.case, PunctureCase::CloseToNearest);
        assert_eq!(r.a, c(2.0, 0.0));
        assert!((r.bound - (1.0 + 2f64.ln())).abs() < 1e-12);

        let r = punctured_sequence_upper(&p, c(1000.0, 0.0), 1.0).unwrap();
        assert!(r.bound <= (1.0 + 6f64.ln()) * 1000.0);

        assert!(punctured_sequence_upper(&p, c(8.0, 0.0), 1.0).is_err());
        assert!(PunctureSequence::new(vec![c(1.0, 0.0), c(5.0, 0.0)], 2.0).is_err());
    }

    #[test]
    fn punctured_cases_are_all_reachable() {
        let p = powers_of_two(40);
        let r = punctured_sequence_upper(&p, c(2.5, 0.0), 1.0).unwrap();
        assert_eq!(r.case, PunctureCase::CloseToNearest);
        let r = punctured_sequence_upper(&p, c(2.0, 1.5), 1.0).unwrap();
        assert_eq!(r.case, PunctureCase::FarFromNearest);
        let r = punctured_sequence_upper(&PunctureSequence::geometric(c(0.5, 0.0), 2.0, 40).unwrap(), c(0.0, 0.5), 1.0)
            .unwrap();
        assert_eq!(r.case, PunctureCase::NearestIsOrigin);
        assert_eq!(r.b, c(0.5, 0.0));
    }

    #[test]
    fn hyperbolic_derivative_examples() {
        let m = LogLiftModel::shifted_exp(10.0).unwrap();
        let v = hyperbolic_derivative(&m, c(3.0, 0.0)).unwrap();
        assert!((v - 5.974556558414552).abs() < 1e-12);
        let mut prev = 0.0;
        for x in [5.0, 10.0, 20.0, 40.0] {
            let v = hyperbolic_derivative(&m, c(x, 0.0)).unwrap();
            assert!(v > prev && (v - x).abs() < 1.0);
            prev = v;
        }
        for z in [c(3.0, 0.4), c(4.0, -1.0)] {
            let a = hyperbolic_derivative(&m, z).unwrap();
            let b = hyperbolic_derivative(&m, z.conj()).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_complement_density_values() {
        assert!(
            (disk_complement_density(1.0, c(0.0, std::f64::consts::E)).unwrap() - 1.0 / std::f64::consts::E).abs()
                < 1e-15
        );
        assert!(disk_complement_density(1.0, c(0.5, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn half_plane_sandwich(q in -5.0f64..5.0, re in 0.001f64..100.0, im in -100.0f64..100.0) {
            let z = c(q + re, im);
            let rho = rho_half_plane(q, z).unwrap();
            let d = z.re - q;
            prop_assert!(standard_estimate_bound(d).unwrap().contains(rho));
            prop_assert!(inscribed_disk_bound(d).unwrap().contains(rho));
            prop_assert!(half_plane_density(q, z).unwrap().contains(rho));
            // The half-plane contains the disk of radius d about z and sits
            // inside the plane punctured at two boundary points.
            let a = c(q, im);
            let b = c(q, im + 3.0 * d);
            prop_assert!(1.0 / rho <= two_puncture_upper(a, b, z, 1.0).unwrap());
        }

        #[test]
        fn linear_ceiling(logm in 0.0f64..6.0, arg in 0.0f64..std::f64::consts::TAU) {
            let p = powers_of_two(64);
            let z = ComplexValue::from_polar(10f64.powf(logm).max(2.0 + 1e-9), arg);
            prop_assume!(!p.points().contains(&z));
            let r = punctured_sequence_upper(&p, z, 1.0).unwrap();
            prop_assert!(r.bound / z.norm() <= 1.0 + 6f64.ln());
        }

        #[test]
        fn symmetry_and_triangle(a in (0.01f64..50.0, -50.0f64..50.0), b in (0.01f64..50.0, -50.0f64..50.0), w in (0.01f64..50.0, -50.0f64..50.0)) {
            let (x, y, z) = (c(a.0, a.1), c(b.0, b.1), c(w.0, w.1));
            let dxy = dist_half_plane(0.0, x, y).unwrap();
            prop_assert!((dxy - dist_half_plane(0.0, y, x).unwrap()).abs() <= 1e-12);
            let dyz = dist_half_plane(0.0, y, z).unwrap();
            let dxz = dist_half_plane(0.0, x, z).unwrap();
            prop_assert!(dxz <= dxy + dyz + 1e-12);
        }

        #[test]
        fn standard_estimate_monotone(d1 in 0.001f64..100.0, d2 in 0.001f64..100.0) {
            prop_assume!(d1 < d2);
            let (a, b) = (standard_estimate_bound(d1).unwrap(), standard_estimate_bound(d2).unwrap());
            prop_assert!(b.lower < a.lower && b.upper < a.upper);
        }
    }
}
