//! Forward orbits, finite-horizon certificates, external addresses, the
//! expansion property, periodic points by backward iteration, and pixel-grid
//! classification in the plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{EntireMapSpec, LogLift};
use crate::complex::{c, ensure_finite, expm1, is_finite, ComplexValue};
use crate::error::{Error, Result};
use crate::tracts::TractAddress;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeFlag {
    StayedInJQ,
    /// The point with this index is outside `V`, or has real part below `Q`.
    LeftDomainAtStep(usize),
    /// Evaluating `F` at the point with this index hit the overflow guard.
    OverflowedAtStep(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub points: Vec<ComplexValue>,
    pub horizon: usize,
    pub min_re_after_first: Option<f64>,
    pub escape_flag: EscapeFlag,
}

/// Iterate `F` up to `horizon` times, stopping at a domain exit or overflow.
pub fn iterate<M: LogLift + ?Sized>(model: &M, z: ComplexValue, horizon: usize, q: f64) -> OrbitRecord {
    let mut points = vec![z];
    let mut flag = EscapeFlag::StayedInJQ;
    for step in 0..horizon {
        let p = points[step];
        if !model.domain_contains(p) {
            // Past the guard the point may still lie in V; report the overflow.
            flag = match model.eval_f(p) {
                Err(Error::Overflow(_)) => EscapeFlag::OverflowedAtStep(step),
                _ => EscapeFlag::LeftDomainAtStep(step),
            };
            break;
        }
        match model.eval_f(p) {
            Ok(w) => {
                points.push(w);
                if w.re < q {
                    flag = EscapeFlag::LeftDomainAtStep(step + 1);
                    break;
                }
            }
            Err(Error::Overflow(_)) => {
                flag = EscapeFlag::OverflowedAtStep(step);
                break;
            }
            Err(_) => {
                flag = EscapeFlag::LeftDomainAtStep(step);
                break;
            }
        }
    }
    let min_re_after_first = points.iter().skip(1).map(|p| p.re).reduce(f64::min);
    OrbitRecord { points, horizon, min_re_after_first, escape_flag: flag }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExternalAddress {
    pub entries: Vec<TractAddress>,
}

impl ExternalAddress {
    pub fn new(entries: Vec<TractAddress>) -> Self {
        Self { entries }
    }

    /// Central-tract address from branch indices.
    pub fn from_indices(indices: &[i64]) -> Self {
        Self { entries: indices.iter().map(|&k| TractAddress::central(k)).collect() }
    }

    /// The first `n` entries of the periodic repetition of `self`.
    pub fn repeat_to(&self, n: usize) -> Self {
        Self { entries: self.entries.iter().copied().cycle().take(n).collect() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn indices(&self) -> Vec<i64> {
        self.entries.iter().map(|t| t.branch_index).collect()
    }
}

/// Tracts of `z, F(z), ..., F^{n-1}(z)`.
pub fn external_address<M: LogLift + ?Sized>(model: &M, z: ComplexValue, n: usize) -> Result<ExternalAddress> {
    let mut entries = Vec::with_capacity(n);
    let mut p = z;
    for i in 0..n {
        let t = model.tract_of(p).map_err(|_| Error::AddressUndefined(i))?;
        entries.push(t);
        if i + 1 < n {
            p = model.eval_f(p).map_err(|_| Error::AddressUndefined(i + 1))?;
        }
    }
    Ok(ExternalAddress { entries })
}

/// `r_k = |F^k z - F^k w| / (2^k |z - w|)` for `k = 0..=n`, requiring equal
/// addresses up to depth `n`. When the last step overflows it is evaluated in
/// logarithmic form (and may be `+inf`).
pub fn expansion_ratios<M: LogLift + ?Sized>(
    model: &M,
    z: ComplexValue,
    w: ComplexValue,
    n: usize,
) -> Result<Vec<f64>> {
    ensure_finite(z, "z")?;
    ensure_finite(w, "w")?;
    if z == w {
        return Ok(vec![1.0; n + 1]);
    }
    let d0 = (z - w).norm();
    let mut out = vec![1.0];
    let (mut a, mut b) = (z, w);
    for k in 0..n {
        let ta = model.tract_of(a).map_err(|_| Error::AddressUndefined(k))?;
        let tb = model.tract_of(b).map_err(|_| Error::AddressUndefined(k))?;
        if ta != tb {
            return Err(Error::AddressMismatch(k));
        }
        let scale = 2f64.powi(k as i32 + 1) * d0;
        match (model.eval_f(a), model.eval_f(b)) {
            (Ok(fa), Ok(fb)) => {
                out.push((fa - fb).norm() / scale);
                a = fa;
                b = fb;
            }
            (Err(Error::Overflow(_)), _) | (_, Err(Error::Overflow(_))) if k + 1 == n => {
                let (la, lb) = (model.eval_log(a)?, model.eval_log(b)?);
                let (hi, lo) = if la.re >= lb.re { (la, lb) } else { (lb, la) };
                let log_diff = hi.re + expm1(lo - hi).norm().ln();
                out.push((log_diff - scale.ln()).exp());
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicPoint {
    /// `cycle[i]` lies in tract `address[i]` and `F(cycle[i]) = cycle[i+1 mod p]`.
    pub cycle: Vec<ComplexValue>,
    pub address: ExternalAddress,
    /// `|composite_inverse(z) - z|` at the returned point.
    pub residual: f64,
    /// Successive backward-iteration increments.
    pub increments: Vec<f64>,
}

impl PeriodicPoint {
    pub fn point(&self) -> ComplexValue {
        self.cycle[0]
    }
}

const MAX_BACKWARD_ITERATIONS: usize = 500;

/// Fixed point of the composition of inverse branches along one period of
/// `address`, followed by the whole cycle.
pub fn point_with_address<M: LogLift + ?Sized>(
    model: &M,
    address: &ExternalAddress,
    q: f64,
    tol: f64,
) -> Result<PeriodicPoint> {
    let p = address.len();
    if p == 0 {
        return Err(Error::Range("address period must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Range(format!("tolerance must be positive, got {tol}")));
    }
    let s = &address.entries;
    let composite = |z: ComplexValue| -> Result<ComplexValue> {
        let mut v = z;
        for i in (0..p).rev() {
            v = model.inverse_branch(s[i], v).map_err(|_| Error::PullbackLeftDomain(i))?;
        }
        Ok(v)
    };
    let mut z = c(model.half_plane() + 1.0, 0.0);
    let mut increments = Vec::new();
    loop {
        let next = composite(z)?;
        let inc = (next - z).norm();
        increments.push(inc);
        z = next;
        if inc <= tol {
            break;
        }
        if increments.len() >= MAX_BACKWARD_ITERATIONS {
            return Err(Error::Precondition(format!(
                "backward iteration did not contract to {tol} in {MAX_BACKWARD_ITERATIONS} steps"
            )));
        }
    }
    let mut cycle = vec![z; p];
    for i in (1..p).rev() {
        let next = cycle[(i + 1) % p];
        cycle[i] = model.inverse_branch(s[i], next).map_err(|_| Error::PullbackLeftDomain(i))?;
    }
    let residual = (composite(z)? - z).norm();
    for (i, pt) in cycle.iter().enumerate() {
        if pt.re < q {
            return Err(Error::OrbitLeftJQ { step: i });
        }
    }
    Ok(PeriodicPoint { cycle, address: address.clone(), residual, increments })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let w = Self { re_min, re_max, im_min, im_max };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.re_min, self.re_max, self.im_min, self.im_max];
        if all.iter().any(|v| !v.is_finite()) || self.re_min >= self.re_max || self.im_min >= self.im_max {
            return Err(Error::Range(format!("degenerate window {self:?}")));
        }
        Ok(())
    }

    /// Center of pixel `(i, j)`; row 0 is the top edge.
    pub fn pixel_center(&self, i: usize, j: usize, width: usize, height: usize) -> ComplexValue {
        // Written as center + half-width * t with t exactly antisymmetric in the
        // pixel index, so symmetric windows give exactly symmetric grids.
        let (cx, hx) = (0.5 * (self.re_min + self.re_max), 0.5 * (self.re_max - self.re_min));
        let (cy, hy) = (0.5 * (self.im_min + self.im_max), 0.5 * (self.im_max - self.im_min));
        let tx = (2.0 * i as f64 + 1.0 - width as f64) / width as f64;
        let ty = (height as f64 - 1.0 - 2.0 * j as f64) / height as f64;
        c(cx + hx * tx, cy + hy * ty)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PixelClass {
    /// `|f^n| >= R` for every `n` up to the horizon.
    InJRHorizon,
    /// Some iterate fell below `R`.
    EscapedSmall,
    /// An iterate overflowed; counts as large.
    OverflowedLarge,
}

impl PixelClass {
    pub fn is_black(self) -> bool {
        !matches!(self, Self::EscapedSmall)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassGrid {
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at the top.
    pub cells: Vec<PixelClass>,
}

impl ClassGrid {
    pub fn get(&self, i: usize, j: usize) -> PixelClass {
        self.cells[j * self.width + i]
    }

    pub fn black_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_black()).count()
    }

    /// One byte per pixel: 0 for black (large orbits), 255 otherwise.
    pub fn gray_bytes(&self) -> Vec<u8> {
        self.cells.iter().map(|c| if c.is_black() { 0 } else { 255 }).collect()
    }
}

fn classify_point(map: &EntireMapSpec, z0: ComplexValue, r: f64, horizon: usize) -> PixelClass {
    let mut z = z0;
    for _ in 0..horizon {
        z = map.eval(z);
        if !is_finite(z) {
            return PixelClass::OverflowedLarge;
        }
        if z.norm() < r {
            return PixelClass::EscapedSmall;
        }
    }
    PixelClass::InJRHorizon
}

/// Classify the orbit of every pixel center; rows are processed in parallel
/// and written to fixed positions, so the result does not depend on
/// scheduling.
pub fn classify_grid(
    map: &EntireMapSpec,
    window: &Window,
    resolution: (usize, usize),
    escape_radius: f64,
    horizon: usize,
) -> Result<ClassGrid> {
    map.validate()?;
    window.validate()?;
    let (width, height) = resolution;
    if width == 0 || height == 0 {
        return Err(Error::Range("resolution must be positive".into()));
    }
    if horizon == 0 {
        return Err(Error::Range("horizon must be at least 1".into()));
    }
    if !(escape_radius > 0.0) || !escape_radius.is_finite() {
        return Err(Error::Range(format!("escape radius must be positive, got {escape_radius}")));
    }
    let mut cells = vec![PixelClass::EscapedSmall; width * height];
    cells.par_chunks_mut(width).enumerate().for_each(|(j, row)| {
        for (i, cell) in row.iter_mut().enumerate() {
            let z = window.pixel_center(i, j, width, height);
            *cell = classify_point(map, z, escape_radius, horizon);
        }
    });
    Ok(ClassGrid { width, height, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::LogLiftModel;
    use crate::complex::TWO_PI;
    use proptest::prelude::*;

    fn shifted() -> LogLiftModel {
        LogLiftModel::shifted_exp(10.0).unwrap()
    }

    const FIXED_POINT: f64 = 2.527963201982174;

    #[test]
    fn iterate_examples() {
        let m = shifted();
        let rec = iterate(&m, c(3.0, 0.0), 4, 2.0);
        // e^{23983.47} exceeds the guard on the third application.
        assert_eq!(rec.escape_flag, EscapeFlag::OverflowedAtStep(2));
        assert_eq!(rec.points.len(), 3);
        assert!((rec.points[1].re - 10.085536923187668).abs() < 1e-12);
        assert!((rec.points[2].re - 23983.46842152494).abs() < 1e-8);
        assert!(rec.points.windows(2).all(|p| p[1].re > p[0].re));
        assert_eq!(rec.min_re_after_first, Some(rec.points[1].re));

        let rec = iterate(&m, c(1.0, 0.0), 1, 2.0);
        assert_eq!(rec.escape_flag, EscapeFlag::LeftDomainAtStep(0));

        // The fixed point repels, so rounding limits how long the orbit stays put.
        let rec = iterate(&m, c(FIXED_POINT, 0.0), 10, 2.0);
        assert_eq!(rec.escape_flag, EscapeFlag::StayedInJQ);
        assert!(rec.points.iter().all(|p| (p.re - FIXED_POINT).abs() < 1e-4));
    }

    #[test]
    fn external_address_examples() {
        let m = shifted();
        let a = external_address(&m, c(3.0, 0.0), 3).unwrap();
        assert_eq!(a, ExternalAddress::from_indices(&[0, 0, 0]));
        let a = external_address(&m, c(3.0, TWO_PI), 3).unwrap();
        assert_eq!(a.indices(), vec![1, 0, 0]);
        assert!(matches!(external_address(&m, c(1.0, 0.0), 2), Err(Error::AddressUndefined(0))));
        assert!(matches!(external_address(&m, c(3.0, 0.0), 5), Err(Error::AddressUndefined(3))));
    }

    #[test]
    fn expansion_ratio_examples() {
        let m = shifted();
        assert_eq!(expansion_ratios(&m, c(3.0, 0.0), c(3.0, 0.0), 4).unwrap(), vec![1.0; 5]);
        let r = expansion_ratios(&m, c(3.0, 0.0), c(3.001, 0.0), 3).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|&x| x >= 1.0));
        assert!(r.windows(2).all(|p| p[1] > p[0]));
        let r = expansion_ratios(&m, c(3.0, 0.0), c(3.0, 1e-4), 2).unwrap();
        assert!(r.iter().all(|&x| x >= 1.0 - 1e-9));
        assert!(matches!(expansion_ratios(&m, c(3.0, 0.0), c(3.0, TWO_PI), 2), Err(Error::AddressMismatch(0))));
    }

    #[test]
    fn fixed_points_by_backward_iteration() {
        let m = shifted();
        let p = point_with_address(&m, &ExternalAddress::from_indices(&[0]), 2.0, 1e-12).unwrap();
        assert!((p.point() - c(FIXED_POINT, 0.0)).norm() < 1e-12);
        assert!(p.residual <= 1e-12);
        let p1 = point_with_address(&m, &ExternalAddress::from_indices(&[1]), 2.0, 1e-12).unwrap();
        assert!((p1.point() - c(2.66462898439789, 6.77436493294247)).norm() < 1e-12);
        let z = p1.point();
        assert!(((z + 10.0).ln() + c(0.0, TWO_PI) - z).norm() < 1e-12);
    }

    #[test]
    fn period_two_address() {
        let m = shifted();
        let addr = ExternalAddress::from_indices(&[0, 1]);
        let p = point_with_address(&m, &addr, 2.0, 1e-12).unwrap();
        assert!(p.residual <= 1e-12);
        assert_eq!(p.cycle.len(), 2);
        // Depth 6 is within reach of forward iteration from the computed point.
        let a = external_address(&m, p.point(), 6).unwrap();
        assert_eq!(a, addr.repeat_to(6));
        for i in 0..2 {
            let f = m.eval_f(p.cycle[i]).unwrap();
            assert!((f - p.cycle[(i + 1) % 2]).norm() < 1e-12);
        }
    }

    #[test]
    fn periodic_point_rejects_low_q() {
        let m = shifted();
        assert!(matches!(
            point_with_address(&m, &ExternalAddress::from_indices(&[0]), 3.0, 1e-12),
            Err(Error::OrbitLeftJQ { step: 0 })
        ));
    }

    fn f4() -> EntireMapSpec {
        EntireMapSpec::ExpPlusKappa { kappa: c(1.0038, 2.8999) }
    }

    #[test]
    fn small_window_escapes_immediately() {
        let f1 = EntireMapSpec::LambdaExpm1 { lambda: c(2.0, 0.0) };
        let w = Window::new(-0.5, 0.5, -0.5, 0.5).unwrap();
        let g = classify_grid(&f1, &w, (16, 16), 50.0, 1).unwrap();
        assert!(g.cells.iter().all(|c| *c == PixelClass::EscapedSmall));
    }

    #[test]
    fn pixel_centers_are_symmetric() {
        let w = Window::new(-4.0, 4.0, -4.0, 4.0).unwrap();
        for (i, j) in [(0, 0), (3, 17), (100, 255)] {
            let a = w.pixel_center(i, j, 256, 256);
            let b = w.pixel_center(255 - i, 255 - j, 256, 256);
            assert_eq!(a, -b);
        }
        assert_eq!(w.pixel_center(0, 0, 4, 4), c(-3.0, 3.0));
    }

    #[test]
    fn grid_is_deterministic_and_monotone_in_horizon() {
        let w = Window::new(-4.0, 4.0, -4.0, 4.0).unwrap();
        let a = classify_grid(&f4(), &w, (64, 64), 50.0, 10).unwrap();
        let b = classify_grid(&f4(), &w, (64, 64), 50.0, 10).unwrap();
        assert_eq!(a, b);
        let deeper = classify_grid(&f4(), &w, (64, 64), 50.0, 20).unwrap();
        for (x, y) in deeper.cells.iter().zip(&a.cells) {
            assert!(!x.is_black() || y.is_black());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn backward_contraction(idx in proptest::collection::vec(-4i64..4, 1..4)) {
            let m = shifted();
            let p = point_with_address(&m, &ExternalAddress::from_indices(&idx), 2.0, 1e-12).unwrap();
            for w in p.increments.windows(2) {
                prop_assert!(w[1] <= w[0] / 2.0 + 1e-12);
            }
            prop_assert!(p.residual <= 1e-12);
            let depth = 6usize.min(3 * idx.len());
            let a = external_address(&m, p.point(), depth).unwrap();
            prop_assert_eq!(a, ExternalAddress::from_indices(&idx).repeat_to(depth));
        }

        #[test]
        fn expansion_on_same_address_pairs(idx in proptest::collection::vec(-3i64..3, 4), w in (0.5f64..6.0, -3.0f64..3.0), d in (-0.3f64..0.3, -0.3f64..0.3)) {
            let m = shifted();
            let pull = |mut v: ComplexValue| {
                for k in idx.iter().rev() {
                    v = m.inverse_branch(TractAddress::central(*k), v).unwrap();
                }
                v
            };
            let target = c(w.0, w.1);
            let other = c((w.0 + d.0).max(0.1), w.1 + d.1);
            let r = expansion_ratios(&m, pull(target), pull(other), 4).unwrap();
            prop_assert!(r.iter().all(|&x| x >= 1.0 - 1e-9));
        }
    }
}
