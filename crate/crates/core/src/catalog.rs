//! Catalog of model maps and their logarithmic lifts.
//!
//! A logarithmic lift `F` of an entire map `f` satisfies `exp(F(z)) = f(exp z)`
//! on the preimage of a right half-plane. The canonical model is the shifted
//! exponential `F(z) = e^z - R`; the lifted catalog maps are evaluated through
//! a continuous logarithm of `f` on each tract.

use serde::{Deserialize, Serialize};

use crate::complex::{c, ensure_finite, guarded_exp, is_finite, log1p, wrap_angle, ComplexValue, EXP_GUARD, TWO_PI};
use crate::error::{Error, Result};
use crate::tracts::TractAddress;

const PI: f64 = std::f64::consts::PI;

/// Plane maps with one or two tracts over infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EntireMapSpec {
    /// `a e^z + b`
    ExpAffine { a: ComplexValue, b: ComplexValue },
    /// `lambda (e^z - 1)`
    LambdaExpm1 { lambda: ComplexValue },
    /// `(z + 1) e^z - 1`
    Zexp,
    /// `lambda sinh z`
    Sinh { lambda: ComplexValue },
    /// `e^z + kappa`
    ExpPlusKappa { kappa: ComplexValue },
}

impl EntireMapSpec {
    pub fn validate(&self) -> Result<()> {
        let params: Vec<(&str, ComplexValue)> = match self {
            Self::ExpAffine { a, b } => vec![("a", *a), ("b", *b)],
            Self::LambdaExpm1 { lambda } | Self::Sinh { lambda } => vec![("lambda", *lambda)],
            Self::ExpPlusKappa { kappa } => vec![("kappa", *kappa)],
            Self::Zexp => vec![],
        };
        for (name, v) in &params {
            ensure_finite(*v, name)?;
        }
        match self {
            Self::ExpAffine { a, .. } if a.norm() == 0.0 => Err(Error::Descriptor("a must be nonzero".into())),
            Self::LambdaExpm1 { lambda } | Self::Sinh { lambda } if lambda.norm() == 0.0 => {
                Err(Error::Descriptor("lambda must be nonzero".into()))
            }
            _ => Ok(()),
        }
    }

    /// Coefficients `(a, b)` for maps of the form `a e^z + b`.
    fn affine(&self) -> Option<(ComplexValue, ComplexValue)> {
        match *self {
            Self::ExpAffine { a, b } => Some((a, b)),
            Self::LambdaExpm1 { lambda } => Some((lambda, -lambda)),
            Self::ExpPlusKappa { kappa } => Some((c(1.0, 0.0), kappa)),
            _ => None,
        }
    }

    pub fn eval(&self, z: ComplexValue) -> ComplexValue {
        match *self {
            Self::Zexp => (z + 1.0) * z.exp() - 1.0,
            Self::Sinh { lambda } => lambda * z.sinh(),
            _ => {
                let (a, b) = self.affine().expect("affine family");
                a * z.exp() + b
            }
        }
    }

    pub fn deriv(&self, z: ComplexValue) -> ComplexValue {
        match *self {
            Self::Zexp => (z + 2.0) * z.exp(),
            Self::Sinh { lambda } => lambda * z.cosh(),
            _ => {
                let (a, _) = self.affine().expect("affine family");
                a * z.exp()
            }
        }
    }

    /// Smallest `Q` for which `{|f| > e^Q}` splits into tracts on which the
    /// logarithmic forms below are continuous and free of singular values.
    pub fn min_half_plane(&self) -> f64 {
        match *self {
            Self::Zexp => std::f64::consts::LN_2,
            Self::Sinh { lambda } => lambda.norm().ln(),
            _ => {
                let (a, b) = self.affine().expect("affine family");
                (a.norm() + b.norm()).max(2.0 * b.norm()).ln()
            }
        }
    }

    pub fn tract_count(&self) -> i64 {
        match self {
            Self::Sinh { .. } => 2,
            _ => 1,
        }
    }

    /// Which tract (in the plane) contains `zeta`.
    pub fn tract_index(&self, zeta: ComplexValue) -> i64 {
        match self {
            Self::Sinh { .. } if zeta.re < 0.0 => 1,
            _ => 0,
        }
    }

    /// Argument of `zeta` on the cut used by tract `b`: principal for `b = 0`,
    /// `(0, 2pi]` for the left sinh tract.
    pub fn arg_cut(&self, b: i64, zeta: ComplexValue) -> f64 {
        let a = zeta.arg();
        if b == 1 && a <= 0.0 {
            a + TWO_PI
        } else {
            a
        }
    }

    /// Continuous logarithm of `f` on tract `b`.
    pub fn log_form(&self, b: i64, zeta: ComplexValue) -> ComplexValue {
        match *self {
            Self::Zexp => {
                let zp1 = zeta + 1.0;
                zeta + zp1.ln() + log1p(-(-zeta).exp() / zp1)
            }
            Self::Sinh { lambda } => {
                if b == 0 {
                    (lambda / 2.0).ln() + zeta + log1p(-(-2.0 * zeta).exp())
                } else {
                    (-lambda / 2.0).ln() - zeta + log1p(-(2.0 * zeta).exp())
                }
            }
            _ => {
                let (a, bb) = self.affine().expect("affine family");
                a.ln() + zeta + log1p(bb / a * (-zeta).exp())
            }
        }
    }

    /// `f'/f`, evaluated without forming `f` itself.
    pub fn log_deriv(&self, zeta: ComplexValue) -> ComplexValue {
        match *self {
            Self::Zexp => (zeta + 2.0) / ((zeta + 1.0) - (-zeta).exp()),
            Self::Sinh { .. } => {
                if zeta.re >= 0.0 {
                    let e = (-2.0 * zeta).exp();
                    (1.0 + e) / (1.0 - e)
                } else {
                    let e = (2.0 * zeta).exp();
                    (e + 1.0) / (e - 1.0)
                }
            }
            _ => {
                let (a, b) = self.affine().expect("affine family");
                1.0 / (1.0 + b / a * (-zeta).exp())
            }
        }
    }

    /// Closed-form solution of `log_form(b, zeta) = w`, when one exists.
    fn inverse_log_closed(&self, b: i64, w: ComplexValue) -> Option<ComplexValue> {
        match *self {
            Self::Zexp => None,
            Self::Sinh { lambda } => {
                let right = |w: ComplexValue| {
                    let s = (1.0 + lambda * lambda * (-2.0 * w).exp()).sqrt();
                    w - lambda.ln() + (1.0 + s).ln()
                };
                if b == 0 {
                    Some(right(w))
                } else {
                    let shift = (-lambda / 2.0).ln() - (lambda / 2.0).ln();
                    Some(-right(w - shift))
                }
            }
            _ => {
                let (a, bb) = self.affine().expect("affine family");
                Some(w - a.ln() + log1p(-bb * (-w).exp()))
            }
        }
    }

    /// Solve `log_form(b, zeta) = w` for `zeta` in tract `b`.
    pub fn inverse_log(
        &self,
        b: i64,
        w: ComplexValue,
        newton: &NewtonSettings,
        seed: Option<ComplexValue>,
    ) -> Result<ComplexValue> {
        if let Some(z) = self.inverse_log_closed(b, w) {
            return if is_finite(z) { Ok(z) } else { Err(Error::NewtonDiverged(w)) };
        }
        if let Some(s) = seed.filter(|s| is_finite(*s)) {
            if let Some(z) = self.newton(b, w, s, newton) {
                return Ok(z);
            }
        }
        // Fresh solve: start far to the right where zeta + log(zeta) ~ w is
        // accurate, then walk the target back horizontally.
        let far = w + 20.0;
        let mut zeta = far - far.ln();
        const STEPS: usize = 20;
        for i in 0..=STEPS {
            let target = far + (w - far) * (i as f64 / STEPS as f64);
            zeta = self.newton(b, target, zeta, newton).ok_or(Error::NewtonDiverged(w))?;
        }
        Ok(zeta)
    }

    fn newton(&self, b: i64, target: ComplexValue, seed: ComplexValue, s: &NewtonSettings) -> Option<ComplexValue> {
        let mut z = seed;
        for _ in 0..s.max_iter {
            let g = self.log_form(b, z) - target;
            let dz = g / self.log_deriv(z);
            if !is_finite(dz) {
                return None;
            }
            z -= dz;
            if dz.norm() <= s.tol * (1.0 + z.norm()) {
                let ok = (self.log_form(b, z) - target).norm() <= 1e3 * s.tol * (1.0 + target.norm());
                return ok.then_some(z);
            }
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 50 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    ShiftedExp { r: f64 },
    LiftedEntire { map: EntireMapSpec, newton: NewtonSettings },
}

/// A logarithmic lift `F: V -> {Re w > Q}`, optionally conjugated by a real
/// translation `z -> z + offset` (recorded by [`normalize`]).
#[derive(Clone, Debug, PartialEq)]
pub struct LogLiftModel {
    kind: ModelKind,
    half_plane: f64,
    offset: f64,
}

/// JSON form of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelDescriptor {
    ShiftedExp {
        #[serde(rename = "R")]
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_plane_q: Option<f64>,
        #[serde(default, skip_serializing_if = "is_zero")]
        offset: f64,
    },
    LiftedEntire {
        map: EntireMapSpec,
        #[serde(default)]
        newton: NewtonSettings,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_plane_q: Option<f64>,
        #[serde(default, skip_serializing_if = "is_zero")]
        offset: f64,
    },
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl LogLiftModel {
    /// `F(z) = e^z - R` on `{Re e^z > R}`.
    pub fn shifted_exp(r: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::Descriptor(format!("R must be positive and finite, got {r}")));
        }
        Ok(Self { kind: ModelKind::ShiftedExp { r }, half_plane: 0.0, offset: 0.0 })
    }

    /// Lift of a catalog map; the half-plane defaults to `max(0, Q_min)`.
    pub fn lifted(map: EntireMapSpec, newton: NewtonSettings) -> Result<Self> {
        map.validate()?;
        if !(newton.tol > 0.0) || newton.max_iter == 0 {
            return Err(Error::Descriptor("newton settings need tol > 0 and max_iter > 0".into()));
        }
        let q = map.min_half_plane().max(0.0);
        Ok(Self { kind: ModelKind::LiftedEntire { map, newton }, half_plane: q, offset: 0.0 })
    }

    pub fn with_half_plane(mut self, q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::Range(format!("half-plane Q must be finite, got {q}")));
        }
        match &self.kind {
            ModelKind::ShiftedExp { r } => {
                if r + self.offset + q < 0.0 {
                    return Err(Error::Precondition(format!(
                        "Q = {q} places the branch point of the inverse inside the half-plane"
                    )));
                }
            }
            ModelKind::LiftedEntire { map, .. } => {
                let q_min = map.min_half_plane() - self.offset;
                if q < q_min {
                    return Err(Error::Precondition(format!("Q = {q} is below the tract threshold {q_min}")));
                }
            }
        }
        self.half_plane = q;
        Ok(self)
    }

    fn with_offset(&self, t: f64) -> Self {
        Self { kind: self.kind.clone(), half_plane: 0.0, offset: self.offset + t }
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn from_descriptor(d: &ModelDescriptor) -> Result<Self> {
        let (model, q, offset) = match d {
            ModelDescriptor::ShiftedExp { r, half_plane_q, offset } => (Self::shifted_exp(*r)?, *half_plane_q, *offset),
            ModelDescriptor::LiftedEntire { map, newton, half_plane_q, offset } => {
                (Self::lifted(map.clone(), *newton)?, *half_plane_q, *offset)
            }
        };
        if !offset.is_finite() {
            return Err(Error::Descriptor("offset must be finite".into()));
        }
        let mut model = model;
        if offset != 0.0 {
            model = model.with_offset(offset);
            if let ModelKind::LiftedEntire { map, .. } = &model.kind {
                model.half_plane = (map.min_half_plane() - offset).max(0.0);
            }
        }
        match q {
            Some(q) => model.with_half_plane(q),
            None => Ok(model),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: ModelDescriptor = serde_json::from_str(text).map_err(|e| Error::Descriptor(e.to_string()))?;
        Self::from_descriptor(&d)
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        match &self.kind {
            ModelKind::ShiftedExp { r } => {
                ModelDescriptor::ShiftedExp { r: *r, half_plane_q: Some(self.half_plane), offset: self.offset }
            }
            ModelKind::LiftedEntire { map, newton } => ModelDescriptor::LiftedEntire {
                map: map.clone(),
                newton: *newton,
                half_plane_q: Some(self.half_plane),
                offset: self.offset,
            },
        }
    }

    /// `exp(z + offset)` and the plane tract containing it.
    fn plane_point(&self, map: &EntireMapSpec, z: ComplexValue) -> Result<(ComplexValue, i64)> {
        let zeta = guarded_exp(z + self.offset)?;
        Ok((zeta, map.tract_index(zeta)))
    }
}

/// Common interface of logarithmic lifts and their translates.
pub trait LogLift: Send + Sync {
    /// The target half-plane is `{Re w > half_plane()}`.
    fn half_plane(&self) -> f64;
    fn domain_contains(&self, z: ComplexValue) -> bool;
    fn eval_f(&self, z: ComplexValue) -> Result<ComplexValue>;
    fn eval_df(&self, z: ComplexValue) -> Result<ComplexValue>;
    /// A logarithm `L` of `F(z)` with `Im L` in `(-pi, pi]`, valid past the
    /// overflow guard.
    fn eval_log(&self, z: ComplexValue) -> Result<ComplexValue>;
    /// `log |F'(z)|`, valid past the overflow guard where the model allows.
    fn log_abs_deriv(&self, z: ComplexValue) -> Result<f64>;
    fn tract_of(&self, z: ComplexValue) -> Result<TractAddress>;
    /// Inverse of `F` restricted to `tract`; `seed` is a nearby preimage used
    /// by models that solve numerically.
    fn inverse_branch_seeded(
        &self,
        tract: TractAddress,
        w: ComplexValue,
        seed: Option<ComplexValue>,
    ) -> Result<ComplexValue>;

    fn inverse_branch(&self, tract: TractAddress, w: ComplexValue) -> Result<ComplexValue> {
        self.inverse_branch_seeded(tract, w, None)
    }

    /// Inverse branch applied to `exp(log_w)`.
    fn inverse_branch_log(&self, tract: TractAddress, log_w: ComplexValue) -> Result<ComplexValue> {
        self.inverse_branch(tract, guarded_exp(log_w)?)
    }
}

impl<M: LogLift + ?Sized> LogLift for &M {
    fn half_plane(&self) -> f64 {
        (**self).half_plane()
    }
    fn domain_contains(&self, z: ComplexValue) -> bool {
        (**self).domain_contains(z)
    }
    fn eval_f(&self, z: ComplexValue) -> Result<ComplexValue> {
        (**self).eval_f(z)
    }
    fn eval_df(&self, z: ComplexValue) -> Result<ComplexValue> {
        (**self).eval_df(z)
    }
    fn eval_log(&self, z: ComplexValue) -> Result<ComplexValue> {
        (**self).eval_log(z)
    }
    fn log_abs_deriv(&self, z: ComplexValue) -> Result<f64> {
        (**self).log_abs_deriv(z)
    }
    fn tract_of(&self, z: ComplexValue) -> Result<TractAddress> {
        (**self).tract_of(z)
    }
    fn inverse_branch_seeded(
        &self,
        tract: TractAddress,
        w: ComplexValue,
        seed: Option<ComplexValue>,
    ) -> Result<ComplexValue> {
        (**self).inverse_branch_seeded(tract, w, seed)
    }
    fn inverse_branch_log(&self, tract: TractAddress, log_w: ComplexValue) -> Result<ComplexValue> {
        (**self).inverse_branch_log(tract, log_w)
    }
}

impl LogLift for LogLiftModel {
    fn half_plane(&self) -> f64 {
        self.half_plane
    }

    fn domain_contains(&self, z: ComplexValue) -> bool {
        if !is_finite(z) {
            return false;
        }
        let u = z + self.offset;
        match &self.kind {
            ModelKind::ShiftedExp { r } => {
                let threshold = r + self.offset + self.half_plane;
                if u.re <= EXP_GUARD {
                    return u.re.exp() * u.im.cos() > threshold;
                }
                let cos = u.im.cos();
                if cos > 0.0 {
                    threshold <= 0.0 || u.re + cos.ln() > threshold.ln()
                } else if cos == 0.0 {
                    0.0 > threshold
                } else {
                    false
                }
            }
            ModelKind::LiftedEntire { map, .. } => {
                if u.re > EXP_GUARD {
                    return false;
                }
                let zeta = u.exp();
                let b = map.tract_index(zeta);
                let re = map.log_form(b, zeta).re;
                re.is_finite() && re - self.offset > self.half_plane
            }
        }
    }

    fn eval_f(&self, z: ComplexValue) -> Result<ComplexValue> {
        ensure_finite(z, "z")?;
        match &self.kind {
            ModelKind::ShiftedExp { r } => {
                let e = guarded_exp(z + self.offset)?;
                if !self.domain_contains(z) {
                    return Err(Error::Domain(z));
                }
                Ok(e - (r + self.offset))
            }
            ModelKind::LiftedEntire { map, .. } => {
                let (zeta, b) = self.plane_point(map, z)?;
                if !self.domain_contains(z) {
                    return Err(Error::Domain(z));
                }
                Ok(map.log_form(b, zeta) - self.offset)
            }
        }
    }

    fn eval_df(&self, z: ComplexValue) -> Result<ComplexValue> {
        ensure_finite(z, "z")?;
        match &self.kind {
            ModelKind::ShiftedExp { .. } => {
                let e = guarded_exp(z + self.offset)?;
                if !self.domain_contains(z) {
                    return Err(Error::Domain(z));
                }
                Ok(e)
            }
            ModelKind::LiftedEntire { map, .. } => {
                let (zeta, _) = self.plane_point(map, z)?;
                if !self.domain_contains(z) {
                    return Err(Error::Domain(z));
                }
                Ok(zeta * map.log_deriv(zeta))
            }
        }
    }

    fn eval_log(&self, z: ComplexValue) -> Result<ComplexValue> {
        ensure_finite(z, "z")?;
        if !self.domain_contains(z) {
            return Err(Error::Domain(z));
        }
        let u = z + self.offset;
        let l = match &self.kind {
            ModelKind::ShiftedExp { r } if u.re > EXP_GUARD => {
                let l = u + log1p(-(r + self.offset) * (-u).exp());
                c(l.re, wrap_angle(l.im))
            }
            _ => self.eval_f(z)?.ln(),
        };
        if is_finite(l) {
            Ok(l)
        } else {
            Err(Error::NonFinite(format!("log F({z})")))
        }
    }

    fn log_abs_deriv(&self, z: ComplexValue) -> Result<f64> {
        ensure_finite(z, "z")?;
        if !self.domain_contains(z) {
            return Err(Error::Domain(z));
        }
        match &self.kind {
            ModelKind::ShiftedExp { .. } => Ok(z.re + self.offset),
            ModelKind::LiftedEntire { map, .. } => {
                let (zeta, _) = self.plane_point(map, z)?;
                Ok(z.re + self.offset + map.log_deriv(zeta).norm().ln())
            }
        }
    }

    fn tract_of(&self, z: ComplexValue) -> Result<TractAddress> {
        if !self.domain_contains(z) {
            return Err(Error::Domain(z));
        }
        let u = z + self.offset;
        match &self.kind {
            ModelKind::ShiftedExp { .. } => Ok(TractAddress::new((u.im / TWO_PI).round() as i64, 0)),
            ModelKind::LiftedEntire { map, .. } => {
                let (zeta, b) = self.plane_point(map, z)?;
                let k = ((u.im - map.arg_cut(b, zeta)) / TWO_PI).round() as i64;
                Ok(TractAddress::new(k, b))
            }
        }
    }

    fn inverse_branch_seeded(
        &self,
        tract: TractAddress,
        w: ComplexValue,
        seed: Option<ComplexValue>,
    ) -> Result<ComplexValue> {
        ensure_finite(w, "w")?;
        if w.re <= self.half_plane {
            return Err(Error::Range(format!("w = {w} is not in the half-plane Re w > {}", self.half_plane)));
        }
        let shift = c(-self.offset, TWO_PI * tract.branch_index as f64);
        match &self.kind {
            ModelKind::ShiftedExp { r } => {
                if tract.inner_branch != 0 {
                    return Err(Error::Range(format!("no inner branch {} for this model", tract.inner_branch)));
                }
                Ok((w + (r + self.offset)).ln() + shift)
            }
            ModelKind::LiftedEntire { map, newton } => {
                let b = tract.inner_branch;
                if b < 0 || b >= map.tract_count() {
                    return Err(Error::Range(format!("no inner branch {b} for this model")));
                }
                let seed_zeta =
                    seed.and_then(|s| guarded_exp(s + self.offset).ok()).filter(|s| map.tract_index(*s) == b);
                let zeta = map.inverse_log(b, w + self.offset, newton, seed_zeta)?;
                let log_zeta = c(zeta.norm().ln(), map.arg_cut(b, zeta));
                Ok(log_zeta + shift)
            }
        }
    }

    fn inverse_branch_log(&self, tract: TractAddress, log_w: ComplexValue) -> Result<ComplexValue> {
        ensure_finite(log_w, "log w")?;
        match &self.kind {
            ModelKind::ShiftedExp { r } if log_w.re > EXP_GUARD => {
                if tract.inner_branch != 0 {
                    return Err(Error::Range(format!("no inner branch {} for this model", tract.inner_branch)));
                }
                let l = c(log_w.re, wrap_angle(log_w.im));
                if l.im.abs() >= PI / 2.0 {
                    return Err(Error::Range(format!("exp({log_w}) is not in the half-plane")));
                }
                let shift = c(-self.offset, TWO_PI * tract.branch_index as f64);
                Ok(l + log1p((r + self.offset) * (-l).exp()) + shift)
            }
            _ => self.inverse_branch(tract, guarded_exp(log_w)?),
        }
    }
}

/// The translate `F_kappa(z) = F_0(z + kappa)` on `V - kappa`.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaFamilyMember<M: LogLift = LogLiftModel> {
    pub base: M,
    pub kappa: ComplexValue,
}

impl<M: LogLift> KappaFamilyMember<M> {
    pub fn new(base: M, kappa: ComplexValue) -> Result<Self> {
        ensure_finite(kappa, "kappa")?;
        Ok(Self { base, kappa })
    }
}

impl<M: LogLift> LogLift for KappaFamilyMember<M> {
    fn half_plane(&self) -> f64 {
        self.base.half_plane()
    }
    fn domain_contains(&self, z: ComplexValue) -> bool {
        self.base.domain_contains(z + self.kappa)
    }
    fn eval_f(&self, z: ComplexValue) -> Result<ComplexValue> {
        self.base.eval_f(z + self.kappa)
    }
    fn eval_df(&self, z: ComplexValue) -> Result<ComplexValue> {
        self.base.eval_df(z + self.kappa)
    }
    fn eval_log(&self, z: ComplexValue) -> Result<ComplexValue> {
        self.base.eval_log(z + self.kappa)
    }
    fn log_abs_deriv(&self, z: ComplexValue) -> Result<f64> {
        self.base.log_abs_deriv(z + self.kappa)
    }
    fn tract_of(&self, z: ComplexValue) -> Result<TractAddress> {
        self.base.tract_of(z + self.kappa)
    }
    fn inverse_branch_seeded(
        &self,
        tract: TractAddress,
        w: ComplexValue,
        seed: Option<ComplexValue>,
    ) -> Result<ComplexValue> {
        Ok(self.base.inverse_branch_seeded(tract, w, seed.map(|s| s + self.kappa))? - self.kappa)
    }
    fn inverse_branch_log(&self, tract: TractAddress, log_w: ComplexValue) -> Result<ComplexValue> {
        Ok(self.base.inverse_branch_log(tract, log_w)? - self.kappa)
    }
}

/// Sample on which [`normalize`] certifies `|F'| >= 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationCertificate {
    pub samples: usize,
    pub min_abs_deriv: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub model: LogLiftModel,
    /// Translation added by the search (0 when the model was already normalized).
    pub offset: f64,
    pub certificate: NormalizationCertificate,
}

/// Target-side grid: preimages of these points in the central tract sample
/// the domain, including points within 1e-9 of its boundary.
fn certification_targets(q: f64) -> Vec<ComplexValue> {
    let mut res = vec![1e-9];
    res.extend((0..39).map(|i| 1e-3 * (5e4f64).powf(i as f64 / 38.0)));
    let ims: Vec<f64> = (0..161).map(|j| -20.0 + 0.25 * j as f64).collect();
    let mut out = Vec::with_capacity(res.len() * ims.len());
    for &x in &res {
        for &y in &ims {
            out.push(c(q + x, y));
        }
    }
    out
}

const GRID_IM_STEP: f64 = 0.25;

fn certify(model: &LogLiftModel) -> Option<NormalizationCertificate> {
    let targets = certification_targets(model.half_plane);
    let mut min = f64::INFINITY;
    for b in 0..model.kind_tract_count() {
        let tract = TractAddress::new(0, b);
        let deriv_at = |w: ComplexValue, seed: Option<ComplexValue>| -> Option<(f64, ComplexValue)> {
            let z = model.inverse_branch_seeded(tract, w, seed).ok()?;
            Some((model.eval_df(z).ok()?.norm(), z))
        };
        let mut seed = None;
        let mut best = (f64::INFINITY, targets[0]);
        for w in &targets {
            let (d, z) = deriv_at(*w, seed)?;
            seed = Some(z);
            if d < best.0 {
                best = (d, *w);
            }
        }
        // Golden-section refinement in Im w around the best grid point.
        let (re, mut lo, mut hi) = (best.1.re, best.1.im - GRID_IM_STEP, best.1.im + GRID_IM_STEP);
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let a = hi - golden * (hi - lo);
            let b = lo + golden * (hi - lo);
            let (fa, _) = deriv_at(c(re, a), None)?;
            let (fb, _) = deriv_at(c(re, b), None)?;
            best.0 = best.0.min(fa).min(fb);
            if fa < fb {
                hi = b;
            } else {
                lo = a;
            }
        }
        min = min.min(best.0);
    }
    Some(NormalizationCertificate { samples: targets.len() * model.kind_tract_count() as usize, min_abs_deriv: min })
}

impl LogLiftModel {
    fn kind_tract_count(&self) -> i64 {
        match &self.kind {
            ModelKind::ShiftedExp { .. } => 1,
            ModelKind::LiftedEntire { map, .. } => map.tract_count(),
        }
    }
}

/// Restrict to `{Re F > t}` and conjugate by `z -> z + t`, choosing the
/// smallest `t` in `search` (found by bisection) for which `|F'| >= 2` holds on
/// the certification sample. Models that already certify with target
/// `{Re > 0}` are returned unchanged.
pub fn normalize(model: &LogLiftModel, search: (f64, f64)) -> Result<Normalized> {
    let (lo, hi) = search;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Range(format!("invalid search range [{lo}, {hi}]")));
    }
    let passes = |m: &LogLiftModel| certify(m).filter(|c| c.min_abs_deriv >= 2.0);
    if model.half_plane == 0.0 {
        if let Some(certificate) = passes(model) {
            return Ok(Normalized { model: model.clone(), offset: 0.0, certificate });
        }
    }
    let lo = lo.max(model.half_plane);
    if lo > hi {
        return Err(Error::SearchFailed(format!("search range ends below the model half-plane {}", model.half_plane)));
    }
    let Some(mut best) = passes(&model.with_offset(hi)).map(|c| (hi, c)) else {
        return Err(Error::SearchFailed(format!("|F'| >= 2 fails on the sample even at offset {hi}")));
    };
    if let Some(c) = passes(&model.with_offset(lo)) {
        best = (lo, c);
    } else {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..40 {
            let mid = 0.5 * (a + b);
            match passes(&model.with_offset(mid)) {
                Some(c) => {
                    b = mid;
                    best = (mid, c);
                }
                None => a = mid,
            }
        }
    }
    Ok(Normalized { model: model.with_offset(best.0), offset: best.0, certificate: best.1 })
}
