//! Tract addresses, inverse-branch bookkeeping and continuous path lifting.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::catalog::LogLift;
use crate::complex::{ensure_finite, ComplexValue};
use crate::error::{Error, Result};

/// Identifies one tract: the `2 pi i Z` translate index and, for maps with
/// several plane tracts, which one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TractAddress {
    pub branch_index: i64,
    pub inner_branch: i64,
}

impl TractAddress {
    pub const fn new(branch_index: i64, inner_branch: i64) -> Self {
        Self { branch_index, inner_branch }
    }

    pub const fn central(branch_index: i64) -> Self {
        Self::new(branch_index, 0)
    }
}

/// Largest jump between consecutive lifted samples before a step is bisected.
pub const MAX_LIFT_JUMP: f64 = std::f64::consts::FRAC_PI_2;

const MAX_REFINE_DEPTH: u32 = 30;

/// A lifted curve together with the curve it lifts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftedPath {
    /// Curve parameter; integer values are the original source samples.
    pub t: Vec<f64>,
    pub samples: Vec<ComplexValue>,
    pub source_samples: Vec<ComplexValue>,
    pub branch_log: Vec<i64>,
    /// Index into `samples` of each original source sample.
    pub anchors: Vec<usize>,
}

impl LiftedPath {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn endpoint(&self) -> ComplexValue {
        *self.samples.last().expect("lifted paths are nonempty")
    }

    /// CSV with columns `t, source_re, source_im, lift_re, lift_im, branch`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "source_re", "source_im", "lift_re", "lift_im", "branch"])?;
        for i in 0..self.samples.len() {
            let (s, l) = (self.source_samples[i], self.samples[i]);
            w.write_record([
                self.t[i].to_string(),
                s.re.to_string(),
                s.im.to_string(),
                l.re.to_string(),
                l.im.to_string(),
                self.branch_log[i].to_string(),
            ])?;
        }
        w.flush()
    }
}

/// A map whose preimages can be continued along curves.
pub trait PathLift {
    fn forward(&self, z: ComplexValue) -> Result<ComplexValue>;
    /// The preimage of `w` on the sheet through `near`, with its branch integer.
    fn preimage_near(&self, w: ComplexValue, near: ComplexValue) -> Result<(ComplexValue, i64)>;
}

/// Continue the lift of `path` from `start` (a preimage of `path[0]`),
/// bisecting any step whose lifted jump exceeds [`MAX_LIFT_JUMP`].
pub fn lift_curve<L: PathLift + ?Sized>(
    lift: &L,
    start: ComplexValue,
    start_branch: i64,
    path: &[ComplexValue],
) -> Result<LiftedPath> {
    let Some(&first) = path.first() else {
        return Err(Error::Range("cannot lift an empty path".into()));
    };
    ensure_finite(start, "lift start")?;
    let mut out = LiftedPath {
        t: vec![0.0],
        samples: vec![start],
        source_samples: vec![first],
        branch_log: vec![start_branch],
        anchors: vec![0],
    };
    for i in 1..path.len() {
        ensure_finite(path[i], "path sample")?;
        lift_step(lift, &mut out, path[i - 1], path[i], (i - 1) as f64, 1.0, 0, i)?;
        out.anchors.push(out.samples.len() - 1);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn lift_step<L: PathLift + ?Sized>(
    lift: &L,
    out: &mut LiftedPath,
    from: ComplexValue,
    to: ComplexValue,
    t0: f64,
    dt: f64,
    depth: u32,
    index: usize,
) -> Result<()> {
    let prev = out.endpoint();
    let (z, b) = lift.preimage_near(to, prev).map_err(|e| Error::Continuation { index, reason: e.to_string() })?;
    if (z - prev).norm() <= MAX_LIFT_JUMP {
        out.t.push(t0 + dt);
        out.samples.push(z);
        out.source_samples.push(to);
        out.branch_log.push(b);
        return Ok(());
    }
    if depth >= MAX_REFINE_DEPTH {
        return Err(Error::Continuation {
            index,
            reason: format!("lift jumps by {} after {depth} bisections", (z - prev).norm()),
        });
    }
    let mid = 0.5 * (from + to);
    lift_step(lift, out, from, mid, t0, dt / 2.0, depth + 1, index)?;
    lift_step(lift, out, mid, to, t0 + dt / 2.0, dt / 2.0, depth + 1, index)
}

/// Inverse branches of a logarithmic lift continued within one tract.
struct TractLifter<'a, M: LogLift + ?Sized> {
    model: &'a M,
    tract: TractAddress,
}

impl<M: LogLift + ?Sized> PathLift for TractLifter<'_, M> {
    fn forward(&self, z: ComplexValue) -> Result<ComplexValue> {
        self.model.eval_f(z)
    }

    fn preimage_near(&self, w: ComplexValue, near: ComplexValue) -> Result<(ComplexValue, i64)> {
        // F restricted to a tract is a bijection onto the half-plane, so the
        // continuation never leaves the starting tract; `near` seeds Newton.
        let z = self.model.inverse_branch_seeded(self.tract, w, Some(near))?;
        Ok((z, self.tract.branch_index))
    }
}

/// Lift a curve in the target half-plane starting in `tract`.
pub fn lift_path<M: LogLift + ?Sized>(model: &M, tract: TractAddress, path: &[ComplexValue]) -> Result<LiftedPath> {
    let q = model.half_plane();
    if let Some(i) = path.iter().position(|w| !(w.re > q)) {
        return Err(Error::Continuation { index: i, reason: format!("sample {} is outside the half-plane", path[i]) });
    }
    let first = *path.first().ok_or_else(|| Error::Range("cannot lift an empty path".into()))?;
    let start =
        model.inverse_branch(tract, first).map_err(|e| Error::Continuation { index: 0, reason: e.to_string() })?;
    lift_curve(&TractLifter { model, tract }, start, tract.branch_index, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{EntireMapSpec, LogLiftModel, NewtonSettings};
    use crate::complex::{c, TWO_PI};
    use proptest::prelude::*;

    fn shifted() -> LogLiftModel {
        LogLiftModel::shifted_exp(10.0).unwrap()
    }

    #[test]
    fn domain_and_tract_examples() {
        let m = shifted();
        assert!(m.domain_contains(c(3.0, 0.0)));
        assert!(!m.domain_contains(c(3.0, std::f64::consts::PI)));
        assert!(!m.domain_contains(c(1.0, 0.0)));
        assert_eq!(m.tract_of(c(3.0, 0.1)).unwrap(), TractAddress::central(0));
        assert_eq!(m.tract_of(c(3.0, TWO_PI + 0.1)).unwrap(), TractAddress::central(1));
        assert!(matches!(m.tract_of(c(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_branch_examples() {
        let m = shifted();
        let z = m.inverse_branch(TractAddress::central(0), c(10.0, 0.0)).unwrap();
        assert!((z - c(20f64.ln(), 0.0)).norm() < 1e-15);
        let w = m.eval_f(c(3.0, 0.0)).unwrap();
        assert!((m.inverse_branch(TractAddress::central(0), w).unwrap() - c(3.0, 0.0)).norm() < 1e-14);
        let z2 = m.inverse_branch(TractAddress::central(2), c(10.0, 0.0)).unwrap();
        assert!((z2 - c(20f64.ln(), 2.0 * TWO_PI)).norm() < 1e-14);
        assert!(matches!(m.inverse_branch(TractAddress::central(0), c(0.0, 1.0)), Err(Error::Range(_))));
    }

    #[test]
    fn lift_path_examples() {
        let m = shifted();
        let w = c(5.0, 1.0);
        let p = lift_path(&m, TractAddress::central(0), &[w, w]).unwrap();
        assert_eq!(p.samples.len(), 2);
        assert_eq!(p.samples[0], p.samples[1]);
        assert!((m.eval_f(p.samples[0]).unwrap() - w).norm() < 1e-12);

        let seg: Vec<ComplexValue> = (0..=10).map(|i| c(10.0 + i as f64, 0.0)).collect();
        let p = lift_path(&m, TractAddress::central(0), &seg).unwrap();
        assert!((p.samples[0] - c(20f64.ln(), 0.0)).norm() < 1e-15);
        assert!((p.endpoint() - c(30f64.ln(), 0.0)).norm() < 1e-15);
        assert!(p.samples.windows(2).all(|s| s[1].re > s[0].re && s[1].im == 0.0));

        // The segment 5 -> 5 + 2 pi i is lifted inside one tract.
        let wind: Vec<ComplexValue> = (0..=4).map(|i| c(5.0, TWO_PI * i as f64 / 4.0)).collect();
        let p = lift_path(&m, TractAddress::central(3), &wind).unwrap();
        let direct = m.inverse_branch(TractAddress::central(3), c(5.0, TWO_PI)).unwrap();
        assert!((p.endpoint() - direct).norm() < 1e-10);
        assert!(p.branch_log.iter().all(|&b| b == 3));
    }

    #[test]
    fn lifted_path_csv() {
        let m = shifted();
        let p = lift_path(&m, TractAddress::central(1), &[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,source_re,source_im,lift_re,lift_im,branch");
        assert_eq!(lines.count(), p.len());
    }

    #[test]
    fn lift_path_rejects_points_outside_half_plane() {
        let m = shifted();
        assert!(matches!(
            lift_path(&m, TractAddress::central(0), &[c(1.0, 0.0), c(-1.0, 0.0)]),
            Err(Error::Continuation { index: 1, .. })
        ));
    }

    #[test]
    fn newton_lift_follows_long_path() {
        let m = LogLiftModel::lifted(EntireMapSpec::Zexp, NewtonSettings::default()).unwrap();
        let path: Vec<ComplexValue> =
            (0..=200).map(|i| c(1.0 + 0.05 * i as f64, 0.5 * (i as f64 * 0.1).sin() * 20.0)).collect();
        let p = lift_path(&m, TractAddress::central(0), &path).unwrap();
        for (s, w) in p.samples.iter().zip(&p.source_samples) {
            assert!((m.eval_f(*s).unwrap() - w).norm() <= 1e-9);
        }
        let direct = m.inverse_branch(TractAddress::central(0), *path.last().unwrap()).unwrap();
        assert!((p.endpoint() - direct).norm() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn round_trip(re in 0.0f64..40.0, im in -40.0f64..40.0, k in -20i64..20) {
            let m = shifted();
            let z = m.inverse_branch(TractAddress::central(k), c(re + 1e-6, im)).unwrap();
            let t = m.tract_of(z).unwrap();
            prop_assert_eq!(t, TractAddress::central(k));
            let back = m.inverse_branch(t, m.eval_f(z).unwrap()).unwrap();
            prop_assert!((back - z).norm() <= 1e-10);
        }

        #[test]
        fn translate_equivariance(re in 0.001f64..50.0, im in -50.0f64..50.0, k in -50i64..50) {
            let m = shifted();
            let w = c(re, im);
            let a = m.inverse_branch(TractAddress::central(k), w).unwrap();
            let b = m.inverse_branch(TractAddress::central(0), w).unwrap() + c(0.0, TWO_PI * k as f64);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn injectivity(a in (0.001f64..20.0, -20.0f64..20.0), b in (0.001f64..20.0, -20.0f64..20.0), k in -5i64..5) {
            let m = shifted();
            let (w1, w2) = (c(a.0, a.1), c(b.0, b.1));
            prop_assume!(w1 != w2);
            let t = TractAddress::central(k);
            prop_assert_ne!(m.inverse_branch(t, w1).unwrap(), m.inverse_branch(t, w2).unwrap());
        }

        #[test]
        fn lift_consistency(pts in proptest::collection::vec((0.01f64..30.0, -30.0f64..30.0), 2..12), k in -3i64..3) {
            let m = shifted();
            let path: Vec<ComplexValue> = pts.iter().map(|&(x, y)| c(x, y)).collect();
            let p = lift_path(&m, TractAddress::central(k), &path).unwrap();
            for (s, w) in p.samples.iter().zip(&p.source_samples) {
                prop_assert!((m.eval_f(*s).unwrap() - w).norm() <= 1e-9);
            }
            for pair in p.samples.windows(2) {
                prop_assert!((pair[1] - pair[0]).norm() <= MAX_LIFT_JUMP);
            }
            prop_assert_eq!(p.anchors.len(), path.len());
        }
    }
}
