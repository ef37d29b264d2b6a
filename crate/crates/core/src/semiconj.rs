//! Semiconjugacy from a rescaled disjoint-type model to a hyperbolic map.
//!
//! For `f(z) = lambda (e^z - 1)` with `|lambda| < 1`, the disk `U = D_{r_U}`
//! is absorbing and `W = C \ cl U`. With `M = R/K` and `g(z) = f(z/M)`, the
//! maps `theta_k` are built by curve pullback: `theta_1(z) = z/M`, and the
//! curve from `z` through `theta_1(z), ..., theta_k(z)` is the straight segment
//! `[z, z/M]` followed by the lift under `f`, starting at `z/M`, of the
//! corresponding curve for `g(z)`. Then `f(theta_{k+1}(z)) = theta_k(g(z))`.
//!
//! Escaping orbits of `g` overflow after a few steps. Once `|g(u)| >= 1e20`
//! the levels `theta_j(u)` for `j >= 2` agree to `1e-19` and are evaluated in
//! closed form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{c, ensure_finite, expm1, log1p, ComplexValue, EXP_GUARD, TWO_PI};
use crate::error::{Error, Result};
use crate::hypmetric::{disk_complement_density, two_puncture_upper};
use crate::tracts::{lift_curve, PathLift};

/// Samples on each straight segment `[u, u/M]`, spaced geometrically.
const SEGMENT_SAMPLES: usize = 16;
/// `|g(u)|` beyond which deeper levels are evaluated in closed form.
const SATURATION_MODULUS: f64 = 1e20;
const POSTSINGULAR_STEPS: usize = 100;
const BOUNDARY_SAMPLES: usize = 720;

/// A hyperbolic map `f = lambda (e^z - 1)` with its absorbing disk and the
/// constants of the rescaled model `g(z) = f(z/M)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicSetup {
    pub lambda: ComplexValue,
    pub r_u: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// Largest modulus along the sampled orbit of the singular value.
    pub postsingular_max: f64,
    /// Largest `|f|` on the sampled boundary of `U`.
    pub boundary_max: f64,
}

fn invalid(what: impl Into<String>) -> Error {
    Error::SetupInvalid(what.into())
}

impl HyperbolicSetup {
    /// Validate the setup: `|lambda| < 1`, the singular value's orbit stays in
    /// `U`, `|f| < r_U` on `∂U`, `cl U ⊂ D_{K/2}`, and `|z| <= K + 1` whenever
    /// `|f(z)| >= R` fails (via `log(R/|lambda| - 1) >= K + 1`).
    pub fn new(lambda: ComplexValue, r_u: f64, k: f64, r: f64) -> Result<Self> {
        ensure_finite(lambda, "lambda")?;
        if !(lambda.norm() < 1.0) || lambda.norm() == 0.0 {
            return Err(invalid(format!("need 0 < |lambda| < 1, got {}", lambda.norm())));
        }
        if !(r_u > 0.0) || !r_u.is_finite() {
            return Err(invalid(format!("r_U must be positive, got {r_u}")));
        }
        if !(k >= 1.0) || !k.is_finite() {
            return Err(invalid(format!("K must be at least 1, got {k}")));
        }
        if !(r_u < k / 2.0) {
            return Err(invalid(format!("closure of U is not inside D_(K/2): r_U = {r_u}, K = {k}")));
        }
        if !(r >= k) || !r.is_finite() {
            return Err(invalid(format!("R must be at least K, got R = {r}, K = {k}")));
        }
        let f = |z: ComplexValue| lambda * expm1(z);
        let mut v = -lambda;
        let mut postsingular_max = 0.0f64;
        for step in 0..POSTSINGULAR_STEPS {
            postsingular_max = postsingular_max.max(v.norm());
            if !(v.norm() < r_u) {
                return Err(invalid(format!("singular orbit leaves U at step {step} ({v})")));
            }
            v = f(v);
        }
        let mut boundary_max = 0.0f64;
        for j in 0..BOUNDARY_SAMPLES {
            let z = ComplexValue::from_polar(r_u, TWO_PI * j as f64 / BOUNDARY_SAMPLES as f64);
            boundary_max = boundary_max.max(f(z).norm());
        }
        if !(boundary_max < r_u) {
            return Err(invalid(format!("f(U) is not compactly inside U: max |f| on the boundary is {boundary_max}")));
        }
        if !((r / lambda.norm() - 1.0).ln() >= k + 1.0) {
            return Err(invalid(format!(
                "preimage condition log(R/|lambda| - 1) >= K + 1 fails: {} < {}",
                (r / lambda.norm() - 1.0).ln(),
                k + 1.0
            )));
        }
        Ok(Self { lambda, r_u, k, r, m: r / k, postsingular_max, boundary_max })
    }

    /// `lambda = 0.5`, `r_U = 0.7`, `K = 2`, `R = 11`.
    pub fn default_instance() -> Self {
        Self::new(c(0.5, 0.0), 0.7, 2.0, 11.0).expect("default setup is valid")
    }

    pub fn f(&self, z: ComplexValue) -> ComplexValue {
        self.lambda * expm1(z)
    }

    pub fn df(&self, z: ComplexValue) -> ComplexValue {
        self.lambda * z.exp()
    }

    pub fn g(&self, z: ComplexValue) -> ComplexValue {
        self.f(z / self.m)
    }

    /// `log(1 + log M / log 2)`, the hyperbolic length bound for `gamma_1`.
    pub fn mu(&self) -> f64 {
        (1.0 + self.m.ln() / 2f64.ln()).ln()
    }

    /// Inverse branches of `f` in the plane.
    pub fn plane_inverse(&self) -> PlaneInverse {
        PlaneInverse { lambda: self.lambda }
    }

    /// Hyperbolic density of `W = C \ cl U`.
    pub fn rho_w(&self, w: ComplexValue) -> Result<f64> {
        disk_complement_density(self.r_u, w)
    }
}

/// Alias matching the operation name used in reports.
pub fn build_setup(lambda: ComplexValue, r_u: f64, k: f64, r: f64) -> Result<HyperbolicSetup> {
    HyperbolicSetup::new(lambda, r_u, k, r)
}

/// `f^{-1}(w) = Log(w/lambda + 1) + 2 pi i b`, the branch chosen nearest the
/// previous lifted point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneInverse {
    pub lambda: ComplexValue,
}

impl PlaneInverse {
    fn principal(&self, w: ComplexValue) -> Result<ComplexValue> {
        ensure_finite(w, "w")?;
        let a = w / self.lambda + 1.0;
        if a == ComplexValue::new(0.0, 0.0) {
            return Err(Error::Domain(w));
        }
        Ok(a.ln())
    }

    pub fn branch(&self, b: i64, w: ComplexValue) -> Result<ComplexValue> {
        Ok(self.principal(w)? + c(0.0, TWO_PI * b as f64))
    }
}

impl PathLift for PlaneInverse {
    fn forward(&self, z: ComplexValue) -> Result<ComplexValue> {
        Ok(self.lambda * expm1(z))
    }

    fn preimage_near(&self, w: ComplexValue, near: ComplexValue) -> Result<(ComplexValue, i64)> {
        let z0 = self.principal(w)?;
        let b = ((near.im - z0.im) / TWO_PI).round() as i64;
        Ok((z0 + c(0.0, TWO_PI * b as f64), b))
    }
}

/// The polyline through `theta_0(z), theta_1(z), ...`; `marks[j]` indexes
/// `theta_j(z)`. When `saturated`, the last mark stands for every deeper level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaCurve {
    pub points: Vec<ComplexValue>,
    pub marks: Vec<usize>,
    pub saturated: bool,
}

impl ThetaCurve {
    pub fn level(&self, j: usize) -> ComplexValue {
        self.points[self.marks[j.min(self.marks.len() - 1)]]
    }
}

fn segment(u: ComplexValue, m: f64) -> Vec<ComplexValue> {
    (0..SEGMENT_SAMPLES).map(|j| u / m.powf(j as f64 / (SEGMENT_SAMPLES - 1) as f64)).collect()
}

/// `theta_1` and `theta_2` of a point whose `g`-image is huge, in closed form:
/// the lift of `s g(u)` through `v = u/M` is `v + ln s + Log(1 + (1-s)/s e^{-v})`.
fn saturated_tail(u: ComplexValue, m: f64) -> ThetaCurve {
    let v = u / m;
    let mut points = segment(u, m);
    let ev = (-v).exp();
    for j in 1..SEGMENT_SAMPLES {
        let s = m.powf(-(j as f64) / (SEGMENT_SAMPLES - 1) as f64);
        points.push(v + s.ln() + log1p(ev * ((1.0 - s) / s)));
    }
    let n = points.len();
    ThetaCurve { points, marks: vec![0, SEGMENT_SAMPLES - 1, n - 1], saturated: true }
}

/// `g(u)`, or `None` once `|g(u)|` passes the saturation modulus.
fn step_g(setup: &HyperbolicSetup, u: ComplexValue) -> Option<ComplexValue> {
    let v = u / setup.m;
    if v.re > EXP_GUARD {
        return None;
    }
    let w = setup.f(v);
    (w.re.is_finite() && w.im.is_finite() && w.norm() < SATURATION_MODULUS).then_some(w)
}

/// The curve through `theta_0(z), ..., theta_k(z)`.
pub fn theta_curve(setup: &HyperbolicSetup, z: ComplexValue, k: usize) -> Result<ThetaCurve> {
    ensure_finite(z, "z")?;
    if k == 0 {
        return Ok(ThetaCurve { points: vec![z], marks: vec![0], saturated: false });
    }
    let mut orbit = vec![z];
    let mut saturated = false;
    while orbit.len() < k {
        let u = *orbit.last().unwrap();
        if !(u.norm() > setup.r) {
            return Err(Error::Horizon { z, step: orbit.len() - 1 });
        }
        match step_g(setup, u) {
            Some(w) => orbit.push(w),
            None => {
                saturated = true;
                break;
            }
        }
    }
    let top = orbit.len() - 1;
    if !(orbit[top].norm() > setup.r) {
        return Err(Error::Horizon { z, step: top });
    }
    let mut curve = if saturated {
        saturated_tail(orbit[top], setup.m)
    } else {
        let points = segment(orbit[top], setup.m);
        ThetaCurve { points, marks: vec![0, SEGMENT_SAMPLES - 1], saturated: false }
    };
    let inv = setup.plane_inverse();
    for i in (0..top).rev() {
        let start = orbit[i] / setup.m;
        let (_, b) = inv.preimage_near(orbit[i + 1], start)?;
        let lifted = lift_curve(&inv, start, b, &curve.points)?;
        let mut points = segment(orbit[i], setup.m);
        let offset = points.len() - 1;
        points.extend_from_slice(&lifted.samples[1..]);
        let mut marks = vec![0];
        marks.extend(curve.marks.iter().map(|&mk| offset + lifted.anchors[mk]));
        curve = ThetaCurve { points, marks, saturated: curve.saturated };
    }
    Ok(curve)
}

/// Levels `theta_0(z), ..., theta_k(z)` with their increments and curve lengths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemiconjSample {
    pub z: ComplexValue,
    pub theta: ComplexValue,
    pub depth: usize,
    pub levels: Vec<ComplexValue>,
    /// `|theta_{j+1}(z) - theta_j(z)|`.
    pub increments: Vec<f64>,
    /// Estimated hyperbolic length in `W` of the curve from `theta_{j-1}` to
    /// `theta_j`, for `j = 1..=k`, along the sampled polyline.
    pub gamma_lengths: Vec<f64>,
    #[serde(rename = "certified_C")]
    pub certified_c: Option<f64>,
    pub mu: f64,
    pub displacement_bound: Option<f64>,
    pub residual: Option<f64>,
    /// Whether deep levels were evaluated in closed form.
    pub saturated: bool,
}

fn polyline_length(setup: &HyperbolicSetup, pts: &[ComplexValue]) -> f64 {
    pts.windows(2)
        .map(|p| {
            let rho = match (setup.rho_w(p[0]), setup.rho_w(p[1])) {
                (Ok(a), Ok(b)) => a.max(b),
                _ => f64::INFINITY,
            };
            (p[1] - p[0]).norm() * rho
        })
        .sum()
}

/// `theta_0(z), ..., theta_k(z)`.
pub fn theta_level(setup: &HyperbolicSetup, z: ComplexValue, k: usize) -> Result<SemiconjSample> {
    let curve = theta_curve(setup, z, k)?;
    let levels: Vec<ComplexValue> = (0..=k).map(|j| curve.level(j)).collect();
    let increments = levels.windows(2).map(|p| (p[1] - p[0]).norm()).collect();
    let last = curve.marks.len() - 1;
    let gamma_lengths =
        (1..=k)
            .map(|j| {
                if j > last {
                    0.0
                } else {
                    polyline_length(setup, &curve.points[curve.marks[j - 1]..=curve.marks[j]])
                }
            })
            .collect();
    Ok(SemiconjSample {
        z,
        theta: levels[k],
        depth: k,
        levels,
        increments,
        gamma_lengths,
        certified_c: None,
        mu: setup.mu(),
        displacement_bound: None,
        residual: None,
        saturated: curve.saturated && last <= k,
    })
}

/// Smallest `k` with `mu / C^k <= tol`.
pub fn semiconj_depth(mu: f64, c_hat: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Range(format!("tolerance must be positive, got {tol}")));
    }
    if !(c_hat > 1.0) {
        return Err(Error::CertificateMissing);
    }
    let mut k = 0usize;
    while mu / c_hat.powi(k as i32) > tol {
        k += 1;
    }
    Ok(k)
}

/// `theta(z)` to hyperbolic accuracy `tol`, with displacement bound
/// `mu C / (C - 1)` and the residual `|f(theta_k(z)) - theta_k(g(z))|`.
pub fn semiconj_limit(
    setup: &HyperbolicSetup,
    certificate: Option<&ExpansionCertificate>,
    z: ComplexValue,
    tol: f64,
) -> Result<SemiconjSample> {
    let c_hat = certificate.map(|c| c.c_hat).filter(|&c| c > 1.0).ok_or(Error::CertificateMissing)?;
    let mu = setup.mu();
    let k = semiconj_depth(mu, c_hat, tol)?;
    let mut sample = theta_level(setup, z, k)?;
    sample.certified_c = Some(c_hat);
    sample.displacement_bound = Some(mu * c_hat / (c_hat - 1.0));
    sample.residual = match step_g(setup, z) {
        Some(gz) => {
            let image = theta_level(setup, gz, k)?.theta;
            let lhs = setup.f(sample.theta);
            Some((lhs - image).norm())
        }
        None => None,
    };
    Ok(sample)
}

/// [`semiconj_limit`] over many points in parallel; order follows input.
pub fn semiconj_batch(
    setup: &HyperbolicSetup,
    certificate: Option<&ExpansionCertificate>,
    points: &[ComplexValue],
    tol: f64,
) -> Vec<Result<SemiconjSample>> {
    points.par_iter().map(|&z| semiconj_limit(setup, certificate, z, tol)).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CertificateMethod {
    /// Exact density of `W` on both sides.
    #[default]
    DiskComplementExact,
    /// Two-puncture lower bound at `f(z)` with punctures `±r_U`, and
    /// `rho_W(z) <= 2 / (|z| - r_U)`.
    TwoPuncture { k: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionCertificate {
    /// Lower bound for `||Df||_W` over the samples used.
    pub c_hat: f64,
    /// Sample attaining `c_hat`.
    pub worst: ComplexValue,
    pub used: usize,
    pub skipped: usize,
    pub method: CertificateMethod,
}

/// `log |e^z - 1|`, finite for every `Re z`.
fn log_abs_expm1(z: ComplexValue) -> f64 {
    if z.re > 30.0 {
        z.re + log1p(-(-z).exp()).re
    } else {
        expm1(z).norm().ln()
    }
}

/// Lower bound for `||Df(z)||_W`, or `None` when `z` is not in `V = f^{-1}(W) ∩ W`.
pub fn expansion_at(setup: &HyperbolicSetup, z: ComplexValue, method: CertificateMethod) -> Result<Option<f64>> {
    ensure_finite(z, "z")?;
    let r = setup.r_u;
    let log_lambda = setup.lambda.norm().ln();
    let log_f = log_lambda + log_abs_expm1(z);
    if !(z.norm() > r) || !(log_f > r.ln()) {
        return Ok(None);
    }
    let log_df = log_lambda + z.re;
    let bound = match method {
        CertificateMethod::DiskComplementExact => {
            let gain = (log_df - log_f).exp() / (log_f - r.ln());
            gain * z.norm() * (z.norm() / r).ln()
        }
        CertificateMethod::TwoPuncture { k } => {
            let rho_z_upper = 2.0 / (z.norm() - r);
            let rho_fz_lower_times_df = if log_f < 600.0 {
                let upper = two_puncture_upper(c(r, 0.0), c(-r, 0.0), setup.f(z), k)?;
                log_df.exp() / upper
            } else {
                (log_df - log_f).exp() / (k * (1.0 + ((2.0 * r).ln() - log_f).abs()))
            };
            rho_fz_lower_times_df / rho_z_upper
        }
    };
    Ok(Some(bound))
}

/// Polar grid on `r_U < |z| <= 1000`: 160 geometric radii by 360 angles.
pub fn default_certificate_samples(setup: &HyperbolicSetup) -> Vec<ComplexValue> {
    let (radii, angles) = (160usize, 360usize);
    let (lo, hi) = ((setup.r_u * 1.001).ln(), 1000f64.ln());
    let mut out = Vec::with_capacity(radii * angles);
    for i in 0..radii {
        let rho = (lo + (hi - lo) * i as f64 / (radii - 1) as f64).exp();
        for j in 0..angles {
            out.push(ComplexValue::from_polar(rho, TWO_PI * (j as f64 + 0.5) / angles as f64));
        }
    }
    out
}

/// `min ||Df||_W` over the samples lying in `V`; fails unless it exceeds 1.
pub fn expansion_certificate(
    setup: &HyperbolicSetup,
    samples: &[ComplexValue],
    method: CertificateMethod,
) -> Result<ExpansionCertificate> {
    let values: Vec<Option<f64>> =
        samples.par_iter().map(|&z| expansion_at(setup, z, method)).collect::<Result<_>>()?;
    let mut best: Option<(f64, ComplexValue)> = None;
    let mut skipped = 0usize;
    for (z, v) in samples.iter().zip(values) {
        match v {
            Some(v) => {
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, *z));
                }
            }
            None => {
                log::debug!("certificate sample {z} is outside V; skipped");
                skipped += 1;
            }
        }
    }
    if skipped > 0 {
        log::info!("{skipped} of {} certificate samples lie outside V and were skipped", samples.len());
    }
    let (c_hat, worst) = best.ok_or_else(|| Error::Precondition("no certificate sample lies in V".into()))?;
    if !(c_hat > 1.0) {
        return Err(Error::CertificateFailed { c_hat, z: worst });
    }
    Ok(ExpansionCertificate { c_hat, worst, used: samples.len() - skipped, skipped, method })
}
