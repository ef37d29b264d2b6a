//! Conjugacies near infinity built by pullback.
//!
//! For the translate family `F_kappa(z) = F_0(z + kappa)` the conjugacy
//! `Theta` with `Theta ∘ F_0 = F_kappa ∘ Theta` is the limit of
//!
//! ```text
//! Theta_0 = id,   Theta_{n+1}(z) = (F_0)_T^{-1}(Theta_n(F_0 z)) - kappa,
//! ```
//!
//! where `T` is the tract containing `z`. Unrolled, `Theta_n(z)` pulls
//! `F_0^n(z)` back along the orbit of `z`, so every level is computed from one
//! certified forward orbit. Successive levels differ by at most
//! `2|kappa| / 2^n`, which fixes the depth a priori.
//!
//! Forward orbits overflow within a few steps for most points, so an orbit is
//! stopped once `log|F'|` exceeds [`SATURATION_LOG_GAIN`]; beyond that point the
//! first pullback already agrees with every deeper one to within
//! `2|kappa| e^{-40}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{KappaFamilyMember, LogLift};
use crate::complex::{ensure_finite, log1p, ComplexValue};
use crate::error::{Error, Result};
use crate::hypmetric::dist_half_plane;
use crate::orbits::ExternalAddress;
use crate::tracts::TractAddress;

/// Orbits stop once `log|F'|` reaches this value.
pub const SATURATION_LOG_GAIN: f64 = 40.0;

/// Largest depth accepted by [`theta_limit`] unless the caller says otherwise.
pub const DEFAULT_MAX_DEPTH: usize = 200;

/// How the forward orbit of a sample is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitSeed {
    /// Iterate `F` forward from the point.
    Point(ComplexValue),
    /// An exact periodic cycle; forward iteration would drift off it.
    Cycle(Vec<ComplexValue>),
    /// A precomputed orbit `z, F(z), F^2(z), ...`.
    Explicit(Vec<ComplexValue>),
}

impl OrbitSeed {
    pub fn start(&self) -> Option<ComplexValue> {
        match self {
            Self::Point(z) => Some(*z),
            Self::Cycle(v) | Self::Explicit(v) => v.first().copied(),
        }
    }
}

/// A forward orbit certified to stay in `J_Q` up to a working depth.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedOrbit {
    points: Vec<ComplexValue>,
    tracts: Vec<TractAddress>,
    /// Index at which the orbit was stopped by saturation, with `log F` there.
    saturated: Option<(usize, ComplexValue)>,
    depth: usize,
}

const ORBIT_CONSISTENCY: f64 = 1e-8;

fn left(step: usize) -> Error {
    Error::OrbitLeftJQ { step }
}

fn consistent<M: LogLift + ?Sized>(model: &M, a: ComplexValue, b: ComplexValue) -> Result<()> {
    let fa = model.eval_f(a)?;
    if (fa - b).norm() <= ORBIT_CONSISTENCY * (1.0 + b.norm()) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("F({a}) = {fa} does not continue the orbit to {b}")))
    }
}

impl CertifiedOrbit {
    /// Certify `z, F(z), ..., F^depth(z)`: every point before the last lies in
    /// `V`, and every point after the first has real part at least `q`.
    pub fn certify<M: LogLift + ?Sized>(model: &M, seed: &OrbitSeed, depth: usize, q: f64) -> Result<Self> {
        match seed {
            OrbitSeed::Point(z) => Self::by_iteration(model, *z, depth, q),
            OrbitSeed::Cycle(cycle) => Self::periodic(model, cycle, depth, q),
            OrbitSeed::Explicit(points) => Self::explicit(model, points, depth, q),
        }
    }

    fn by_iteration<M: LogLift + ?Sized>(model: &M, z: ComplexValue, depth: usize, q: f64) -> Result<Self> {
        ensure_finite(z, "z")?;
        let mut points = vec![z];
        let mut tracts = Vec::with_capacity(depth);
        for j in 0..depth {
            let p = points[j];
            if (j > 0 && p.re < q) || !model.domain_contains(p) {
                return Err(left(j));
            }
            tracts.push(model.tract_of(p)?);
            if model.log_abs_deriv(p)? >= SATURATION_LOG_GAIN {
                let l = model.eval_log(p)?;
                // Re F(p) = e^{Re l} cos(Im l) must reach q.
                let cos = l.im.cos();
                let reaches = cos > 0.0 && (q <= 0.0 || l.re + cos.ln() >= q.ln());
                if !reaches {
                    return Err(left(j + 1));
                }
                return Ok(Self { points, tracts, saturated: Some((j, l)), depth });
            }
            points.push(model.eval_f(p)?);
        }
        if depth > 0 && points[depth].re < q {
            return Err(left(depth));
        }
        Ok(Self { points, tracts, saturated: None, depth })
    }

    fn periodic<M: LogLift + ?Sized>(model: &M, cycle: &[ComplexValue], depth: usize, q: f64) -> Result<Self> {
        let p = cycle.len();
        if p == 0 {
            return Err(Error::Precondition("empty cycle".into()));
        }
        let mut cycle_tracts = Vec::with_capacity(p);
        for i in 0..p {
            ensure_finite(cycle[i], "cycle point")?;
            if !model.domain_contains(cycle[i]) {
                return Err(left(i));
            }
            consistent(model, cycle[i], cycle[(i + 1) % p])?;
            cycle_tracts.push(model.tract_of(cycle[i])?);
        }
        let points: Vec<ComplexValue> = (0..=depth).map(|j| cycle[j % p]).collect();
        if let Some(j) = (1..=depth).find(|&j| points[j].re < q) {
            return Err(left(j));
        }
        let tracts = (0..depth).map(|j| cycle_tracts[j % p]).collect();
        Ok(Self { points, tracts, saturated: None, depth })
    }

    fn explicit<M: LogLift + ?Sized>(model: &M, orbit: &[ComplexValue], depth: usize, q: f64) -> Result<Self> {
        if orbit.len() < depth + 1 {
            return Err(Error::Precondition(format!(
                "explicit orbit has {} points, depth {depth} needs {}",
                orbit.len(),
                depth + 1
            )));
        }
        let points = orbit[..=depth].to_vec();
        let mut tracts = Vec::with_capacity(depth);
        for j in 0..depth {
            ensure_finite(points[j], "orbit point")?;
            if (j > 0 && points[j].re < q) || !model.domain_contains(points[j]) {
                return Err(left(j));
            }
            consistent(model, points[j], points[j + 1])?;
            tracts.push(model.tract_of(points[j])?);
        }
        if depth > 0 && points[depth].re < q {
            return Err(left(depth));
        }
        Ok(Self { points, tracts, saturated: None, depth })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn start(&self) -> ComplexValue {
        self.points[0]
    }

    /// Computed orbit points (fewer than `depth + 1` after saturation).
    pub fn points(&self) -> &[ComplexValue] {
        &self.points
    }

    pub fn tracts(&self) -> &[TractAddress] {
        &self.tracts
    }

    pub fn saturated_at(&self) -> Option<usize> {
        self.saturated.map(|(j, _)| j)
    }

    /// The orbit of `F^k(z)`, certified to depth `depth - k`.
    pub fn shifted(&self, k: usize) -> Result<Self> {
        if k > self.depth {
            return Err(Error::Range(format!("shift {k} exceeds orbit depth {}", self.depth)));
        }
        if let Some((j, l)) = self.saturated {
            if k > j {
                return Err(Error::Range(format!("orbit saturated at step {j}; cannot shift by {k}")));
            }
            return Ok(Self {
                points: self.points[k..].to_vec(),
                tracts: self.tracts[k..].to_vec(),
                saturated: Some((j - k, l)),
                depth: self.depth - k,
            });
        }
        Ok(Self {
            points: self.points[k..].to_vec(),
            tracts: self.tracts[k..].to_vec(),
            saturated: None,
            depth: self.depth - k,
        })
    }

    /// Values `v_i = Theta_{n-i}(p_i)` for `i = m, ..., 0`, where `m = n` or
    /// the saturation index, returned in increasing `i`.
    fn fold<S, P>(&self, n: usize, saturated_value: S, mut pull: P) -> Result<Vec<ComplexValue>>
    where
        S: FnOnce(usize, ComplexValue, ComplexValue) -> Result<ComplexValue>,
        P: FnMut(usize, ComplexValue) -> Result<ComplexValue>,
    {
        if n > self.depth {
            return Err(Error::Range(format!("level {n} exceeds certified depth {}", self.depth)));
        }
        let (m, top) = match self.saturated {
            Some((j, l)) if j < n => (j, saturated_value(j, self.points[j], l)?),
            _ => (n, self.points[n]),
        };
        let mut values = vec![top; m + 1];
        for i in (0..m).rev() {
            values[i] = pull(i, values[i + 1]).map_err(|e| match e {
                Error::Range(_) => Error::PullbackLeftDomain(i),
                other => other,
            })?;
        }
        Ok(values)
    }
}

/// Theorem-level precondition `Q > 2|kappa| + 1`.
pub fn check_kappa_precondition(kappa: ComplexValue, q: f64) -> Result<()> {
    ensure_finite(kappa, "kappa")?;
    if q > 2.0 * kappa.norm() + 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("Q = {q} must exceed 2|kappa| + 1 = {}", 2.0 * kappa.norm() + 1.0)))
    }
}

/// Smallest `n` with `2|kappa| 2^{1-n} <= tol`.
pub fn required_depth(kappa: ComplexValue, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Range(format!("tolerance must be positive, got {tol}")));
    }
    let mut n = 0usize;
    while tail_bound(kappa, n) > tol {
        n += 1;
    }
    Ok(n)
}

/// `2|kappa| 2^{1-n}`.
pub fn tail_bound(kappa: ComplexValue, n: usize) -> f64 {
    2.0 * kappa.norm() * 2f64.powi(1 - n as i32)
}

/// `Theta_{n-i}(p_i)` along the orbit, in increasing `i`.
fn kappa_values<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    orbit: &CertifiedOrbit,
    n: usize,
) -> Result<Vec<ComplexValue>> {
    orbit.fold(
        n,
        // Theta_1(p) = p - kappa and Theta_2(p) = F_T^{-1}(F(p) - kappa) - kappa
        // exactly; deeper levels differ from Theta_2 by |kappa| e^{-80}.
        |j, p, l| {
            if n - j == 1 {
                Ok(p - kappa)
            } else {
                let log_image = l + log1p(-kappa * (-l).exp());
                Ok(base.inverse_branch_log(orbit.tracts[j], log_image)? - kappa)
            }
        },
        |i, v| Ok(base.inverse_branch(orbit.tracts[i], v)? - kappa),
    )
}

/// `Theta_n(z)` on a certified orbit of `F_0`.
pub fn theta_on_orbit<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    orbit: &CertifiedOrbit,
    n: usize,
) -> Result<ComplexValue> {
    if kappa == ComplexValue::new(0.0, 0.0) || n == 0 {
        return Ok(orbit.start());
    }
    Ok(kappa_values(base, kappa, orbit, n)?[0])
}

/// `Theta_0(z), ..., Theta_max(z)`.
pub fn theta_tower<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    orbit: &CertifiedOrbit,
    max_level: usize,
) -> Result<Vec<ComplexValue>> {
    (0..=max_level).map(|n| theta_on_orbit(base, kappa, orbit, n)).collect()
}

/// `Theta_n(z)` from a seed.
pub fn theta_n<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    seed: &OrbitSeed,
    n: usize,
    q: f64,
) -> Result<ComplexValue> {
    check_kappa_precondition(kappa, q)?;
    if kappa == ComplexValue::new(0.0, 0.0) || n == 0 {
        return seed.start().ok_or_else(|| Error::Precondition("empty seed".into()));
    }
    let orbit = CertifiedOrbit::certify(base, seed, n, q)?;
    theta_on_orbit(base, kappa, &orbit, n)
}

/// `Theta_m(F_0 z)` on the orbit of `z`. When `z` itself saturates, `F_0 z`
/// sits so deep in its tract that `Theta_m(F_0 z) = F_0 z - kappa` to within
/// `|kappa| e^{-40}`.
fn theta_of_image<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    orbit: &CertifiedOrbit,
    m: usize,
) -> Result<ComplexValue> {
    match orbit.saturated_at() {
        Some(0) => {
            let fz = base.eval_f(orbit.start())?;
            Ok(if m == 0 || kappa == ComplexValue::new(0.0, 0.0) { fz } else { fz - kappa })
        }
        _ => theta_on_orbit(base, kappa, &orbit.shifted(1)?, m),
    }
}

/// One computed value of the conjugacy with its error budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugacySample {
    pub z: ComplexValue,
    pub theta: ComplexValue,
    pub depth: usize,
    pub tail_bound: f64,
    pub residual: f64,
    /// Hyperbolic distance from `z` to `theta` in `{Re > Q}`, when both lie there.
    pub displacement: Option<f64>,
    pub address_prefix: ExternalAddress,
}

/// `Theta(z)` to within `tol`, with the depth fixed by the a priori rate.
pub fn theta_limit<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    seed: &OrbitSeed,
    tol: f64,
    q: f64,
    max_depth: usize,
) -> Result<ConjugacySample> {
    check_kappa_precondition(kappa, q)?;
    let depth = required_depth(kappa, tol)?;
    if depth > max_depth {
        return Err(Error::DepthExceeded { needed: depth, max: max_depth });
    }
    let z = seed.start().ok_or_else(|| Error::Precondition("empty seed".into()))?;
    let orbit = CertifiedOrbit::certify(base, seed, depth.max(1), q)?;
    let theta = theta_on_orbit(base, kappa, &orbit, depth)?;
    let residual = if kappa == ComplexValue::new(0.0, 0.0) {
        0.0
    } else if depth == 0 {
        (base.eval_f(theta + kappa)? - base.eval_f(z)?).norm()
    } else {
        (base.eval_f(theta + kappa)? - theta_of_image(base, kappa, &orbit, depth - 1)?).norm()
    };
    let known = orbit.tracts().len().min(depth);
    Ok(ConjugacySample {
        z,
        theta,
        depth,
        tail_bound: tail_bound(kappa, depth),
        residual,
        displacement: dist_half_plane(q, z, theta).ok(),
        address_prefix: ExternalAddress::new(orbit.tracts()[..known].to_vec()),
    })
}

/// [`theta_limit`] over many seeds in parallel; output order follows input.
pub fn theta_limit_batch<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    seeds: &[OrbitSeed],
    tol: f64,
    q: f64,
    max_depth: usize,
) -> Vec<Result<ConjugacySample>> {
    seeds.par_iter().map(|s| theta_limit(base, kappa, s, tol, q, max_depth)).collect()
}

/// `|Theta_n(F_0 z) - F_kappa(Theta_{n+1}(z))|`; zero up to rounding.
pub fn conjugacy_residual<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    seed: &OrbitSeed,
    n: usize,
    q: f64,
) -> Result<f64> {
    check_kappa_precondition(kappa, q)?;
    let orbit = CertifiedOrbit::certify(base, seed, n + 1, q)?;
    let outer = theta_on_orbit(base, kappa, &orbit, n + 1)?;
    let image = theta_of_image(base, kappa, &orbit, n)?;
    Ok((image - base.eval_f(outer + kappa)?).norm())
}

/// `|Theta(Theta'(w)) - w|`, where `Theta'` conjugates `F_kappa` back to
/// `F_0` (the translate family based at `F_kappa` with parameter `-kappa`).
/// `w` must lie in `J_{2Q}(F_kappa)` to the working depth.
pub fn inverse_theta_check<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    w_seed: &OrbitSeed,
    tol: f64,
    q: f64,
) -> Result<f64> {
    check_kappa_precondition(kappa, q)?;
    let w = w_seed.start().ok_or_else(|| Error::Precondition("empty seed".into()))?;
    if kappa == ComplexValue::new(0.0, 0.0) {
        return Ok(0.0);
    }
    let fk = KappaFamilyMember::new(base, kappa)?;
    let n = required_depth(kappa, tol)?;
    let w_orbit = CertifiedOrbit::certify(&fk, w_seed, n, 2.0 * q)?;
    let back_seed = match w_seed {
        OrbitSeed::Point(_) => OrbitSeed::Point(theta_limit(&fk, -kappa, w_seed, tol, q, DEFAULT_MAX_DEPTH)?.theta),
        // Theta' maps the cycle of w onto a cycle of F_0.
        OrbitSeed::Cycle(cycle) => {
            let p = cycle.len();
            let images = (0..p)
                .map(|i| {
                    let rotated: Vec<ComplexValue> = (0..p).map(|j| cycle[(i + j) % p]).collect();
                    Ok(theta_limit(&fk, -kappa, &OrbitSeed::Cycle(rotated), tol, q, DEFAULT_MAX_DEPTH)?.theta)
                })
                .collect::<Result<_>>()?;
            OrbitSeed::Cycle(images)
        }
        // The F_0-orbit of Theta'(w) is read off the Theta' tower.
        OrbitSeed::Explicit(_) => {
            if w_orbit.saturated_at().is_some() {
                return Err(Error::Precondition("explicit orbits must not saturate".into()));
            }
            let z_orbit =
                (0..=n).map(|j| theta_on_orbit(&fk, -kappa, &w_orbit.shifted(j)?, n - j)).collect::<Result<_>>()?;
            OrbitSeed::Explicit(z_orbit)
        }
    };
    let back = theta_limit(base, kappa, &back_seed, tol, q, DEFAULT_MAX_DEPTH)?.theta;
    Ok((back - w).norm())
}

/// Integer relabeling of tracts of `F` to tracts of `G`.
pub trait TractCorrespondence: Sync {
    fn image(&self, tract: TractAddress) -> Option<TractAddress>;
}

impl<F> TractCorrespondence for F
where
    F: Fn(TractAddress) -> Option<TractAddress> + Sync,
{
    fn image(&self, tract: TractAddress) -> Option<TractAddress> {
        self(tract)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IdentityCorrespondence;

impl TractCorrespondence for IdentityCorrespondence {
    fn image(&self, tract: TractAddress) -> Option<TractAddress> {
        Some(tract)
    }
}

/// `k -> k + delta` on branch indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftCorrespondence {
    pub delta: i64,
}

impl TractCorrespondence for ShiftCorrespondence {
    fn image(&self, tract: TractAddress) -> Option<TractAddress> {
        Some(TractAddress::new(tract.branch_index + self.delta, tract.inner_branch))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralPullback {
    pub theta: ComplexValue,
    /// `Theta_m(z)` for `m = 0..=n`.
    pub levels: Vec<ComplexValue>,
    /// Hyperbolic distances in `{Re > 0}` between consecutive levels.
    pub increments: Vec<f64>,
    /// `max_i [d_i - d_{i+1}/2]` with `d_i = dist(p_i, Theta_{n-i}(p_i))`;
    /// then `dist(z, theta) <= 2 c_hat`.
    pub c_hat: f64,
    pub distance: f64,
}

fn general_values<G, C>(g: &G, corr: &C, orbit: &CertifiedOrbit, n: usize) -> Result<Vec<ComplexValue>>
where
    G: LogLift + ?Sized,
    C: TractCorrespondence + ?Sized,
{
    let image = |t: TractAddress| corr.image(t).ok_or(Error::CorrespondenceGap(t));
    if n == 0 {
        return Ok(vec![orbit.start()]);
    }
    orbit.fold(
        n,
        |j, _, l| {
            let t = image(orbit.tracts[j])?;
            g.inverse_branch_log(t, l)
        },
        |i, v| g.inverse_branch(image(orbit.tracts[i])?, v),
    )
}

/// `Theta_{n+1}(z) = G_{T'}^{-1}(Theta_n(F z))` with `T' = corr(T)`.
pub fn general_pullback<F, G, C>(f: &F, g: &G, corr: &C, seed: &OrbitSeed, n: usize, q: f64) -> Result<GeneralPullback>
where
    F: LogLift + ?Sized,
    G: LogLift + ?Sized,
    C: TractCorrespondence + ?Sized,
{
    let orbit = CertifiedOrbit::certify(f, seed, n.max(1), q)?;
    let values = general_values(g, corr, &orbit, n)?;
    let dist = |a, b| dist_half_plane(0.0, a, b);
    let m = values.len() - 1;
    let d: Vec<f64> = (0..=m).map(|i| dist(orbit.points[i], values[i])).collect::<Result<_>>()?;
    let mut c_hat = d[m];
    for i in 0..m {
        c_hat = c_hat.max(d[i] - d[i + 1] / 2.0);
    }
    let mut levels = Vec::with_capacity(n + 1);
    for level in 0..=n {
        levels.push(general_values(g, corr, &orbit, level)?[0]);
    }
    let increments = levels.windows(2).map(|p| dist(p[0], p[1])).collect::<Result<_>>()?;
    Ok(GeneralPullback { theta: values[0], levels, increments, c_hat, distance: d[0] })
}

/// Largest discrepancy between the translate-family conjugacy and the general
/// pullback with `G = F_kappa` and the identity relabeling, at equal depth.
pub fn uniqueness_crosscheck<M: LogLift + ?Sized>(
    base: &M,
    kappa: ComplexValue,
    seeds: &[OrbitSeed],
    tol: f64,
    q: f64,
) -> Result<f64> {
    check_kappa_precondition(kappa, q)?;
    if kappa == ComplexValue::new(0.0, 0.0) {
        return Ok(0.0);
    }
    let fk = KappaFamilyMember::new(base, kappa)?;
    let per: Vec<Result<f64>> = seeds
        .par_iter()
        .map(|seed| {
            let s = theta_limit(base, kappa, seed, tol, q, DEFAULT_MAX_DEPTH)?;
            let g = general_pullback(base, &fk, &IdentityCorrespondence, seed, s.depth, q)?;
            Ok((s.theta - g.theta).norm())
        })
        .collect();
    per.into_iter().try_fold(0.0f64, |acc, r| Ok(acc.max(r?)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisplacementReport {
    pub max_distance: f64,
    pub distances: Vec<f64>,
    /// `|z - theta| / (min(Re z, Re theta) - Q')`, a bound for each distance.
    pub ceilings: Vec<f64>,
}

/// Hyperbolic displacement `dist(z, Theta(z))` in `{Re > Q'}` over samples.
pub fn displacement_bound_report(samples: &[ConjugacySample], q_prime: f64) -> Result<DisplacementReport> {
    let mut distances = Vec::with_capacity(samples.len());
    let mut ceilings = Vec::with_capacity(samples.len());
    for s in samples {
        distances.push(dist_half_plane(q_prime, s.z, s.theta)?);
        ceilings.push((s.z - s.theta).norm() / (s.z.re.min(s.theta.re) - q_prime));
    }
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    Ok(DisplacementReport { max_distance, distances, ceilings })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KappaDerivative {
    /// `|d Theta / d conj(kappa)|` by central differences.
    pub cr_residual: f64,
    /// `d Theta / d kappa` by central differences.
    pub d_dkappa: ComplexValue,
}

/// Wirtinger derivatives of `kappa -> Theta^kappa(z)` at `kappa0`, all five
/// parameters evaluated at the same depth on one orbit of `F_0`.
pub fn holomorphy_in_kappa<M: LogLift + ?Sized>(
    base: &M,
    seed: &OrbitSeed,
    kappa0: ComplexValue,
    h: f64,
    q: f64,
    depth: usize,
) -> Result<KappaDerivative> {
    if !(h > 0.0) {
        return Err(Error::Range(format!("step h must be positive, got {h}")));
    }
    let i = ComplexValue::i();
    let params = [kappa0, kappa0 + h, kappa0 - h, kappa0 + i * h, kappa0 - i * h];
    for k in params {
        check_kappa_precondition(k, q)?;
    }
    let orbit = CertifiedOrbit::certify(base, seed, depth, q)?;
    let t = |k: ComplexValue| theta_on_orbit(base, k, &orbit, depth);
    let (xp, xm, yp, ym) = (t(params[1])?, t(params[2])?, t(params[3])?, t(params[4])?);
    let dbar = (xp - xm + i * (yp - ym)) / (4.0 * h);
    let d = (xp - xm - i * (yp - ym)) / (4.0 * h);
    Ok(KappaDerivative { cr_residual: dbar.norm(), d_dkappa: d })
}

/// `2|kappa| / (Q' - 1)`.
pub fn motion_dilatation_ceiling(kappa: ComplexValue, q_prime: f64) -> Result<f64> {
    ensure_finite(kappa, "kappa")?;
    if !(q_prime > 1.0) {
        return Err(Error::Range(format!("Q' must exceed 1, got {q_prime}")));
    }
    Ok(2.0 * kappa.norm() / (q_prime - 1.0))
}
