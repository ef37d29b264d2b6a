//! The invariant suite behind `tractlab verify`.

use std::path::PathBuf;

use rand::Rng;
use serde::Serialize;
use tractlab_core::catalog::{EntireMapSpec, KappaFamilyMember, LogLift, LogLiftModel};
use tractlab_core::complex::{c, ComplexValue};
use tractlab_core::conjugacy::{
    conjugacy_residual, holomorphy_in_kappa, inverse_theta_check, theta_limit, theta_tower, uniqueness_crosscheck,
    CertifiedOrbit, OrbitSeed, DEFAULT_MAX_DEPTH,
};
use tractlab_core::hypmetric::{dist_half_plane, punctured_sequence_upper, PunctureSequence};
use tractlab_core::orbits::{classify_grid, expansion_ratios, point_with_address, ClassGrid, ExternalAddress, Window};
use tractlab_core::samples::{box_samples, escaping_samples, periodic_samples, rng};
use tractlab_core::semiconj::{
    default_certificate_samples, expansion_certificate, semiconj_limit, CertificateMethod, HyperbolicSetup,
};
use tractlab_core::tracts::TractAddress;

use crate::config::{Suite, VerifySection};
use crate::error::{config_err, CliError, CliResult};
use crate::output::write_json;

const KAPPA: ComplexValue = ComplexValue::new(0.3, 0.2);
const Q: f64 = 2.0;
const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Property {
    pub suite: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyJob {
    pub suite: Suite,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl VerifyJob {
    pub fn from_section(s: &VerifySection) -> CliResult<Self> {
        let samples = s.samples.unwrap_or(100);
        if samples == 0 {
            return Err(config_err("verify.samples", "must be at least 1"));
        }
        Ok(Self { suite: s.suite.unwrap_or(Suite::All), samples, seed: s.seed.unwrap_or(0), out: s.out.clone() })
    }

    /// Runs the suite, prints one line per property and fails if any property fails.
    pub fn run(&self) -> CliResult<Vec<Property>> {
        let props = run_suite(self.suite, self.samples, self.seed);
        for p in &props {
            println!("{} {}/{}: {}", if p.pass { "PASS" } else { "FAIL" }, p.suite, p.name, p.detail);
        }
        if let Some(out) = &self.out {
            write_json(out, &props)?;
        }
        let failed: Vec<String> = props.iter().filter(|p| !p.pass).map(|p| format!("{}/{}", p.suite, p.name)).collect();
        if failed.is_empty() {
            Ok(props)
        } else {
            Err(CliError::Verification(format!(
                "{} of {} properties: {}",
                failed.len(),
                props.len(),
                failed.join(", ")
            )))
        }
    }
}

pub fn run_suite(suite: Suite, n: usize, seed: u64) -> Vec<Property> {
    let mut out = Vec::new();
    if matches!(suite, Suite::All | Suite::Conjugacy) {
        out.extend(conjugacy_suite(n, seed));
    }
    if matches!(suite, Suite::All | Suite::Semiconj) {
        out.extend(semiconj_suite(n, seed));
    }
    if matches!(suite, Suite::All | Suite::Metric) {
        out.extend(metric_suite(n, seed));
    }
    if matches!(suite, Suite::All | Suite::Render) {
        out.extend(render_suite());
    }
    out
}

fn prop(suite: &'static str, name: &'static str, pass: bool, detail: String) -> Property {
    Property { suite, name, pass, detail }
}

fn f0() -> LogLiftModel {
    LogLiftModel::shifted_exp(10.0).expect("R = 10 is valid")
}

fn conjugacy_suite(n: usize, seed: u64) -> Vec<Property> {
    const S: &str = "conjugacy";
    let m = f0();
    let samples = match periodic_samples(&m, n, 3, (-5, 5), Q, seed) {
        Ok(s) => s,
        Err(e) => return vec![prop(S, "samples", false, e.to_string())],
    };
    let mut props = Vec::new();

    let bound = 2.0 * KAPPA.norm();
    let (mut dist, mut rate, mut errors) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
    for s in &samples {
        let Ok(t) = CertifiedOrbit::certify(&m, s, 40, Q).and_then(|o| theta_tower(&m, KAPPA, &o, 40)) else {
            errors += 1;
            continue;
        };
        for k in 0..=40 {
            dist = dist.max((t[k] - t[0]).norm() - bound);
            if k < 40 {
                rate = rate.max((t[k + 1] - t[k]).norm() - bound * 2f64.powi(-(k as i32)));
            }
        }
    }
    props.push(prop(
        S,
        "distance_bound",
        errors == 0 && dist <= 1e-9,
        format!("max |Theta_n(z) - z| - 2|kappa| = {dist:.3e} over {} cycles, {errors} errors", samples.len()),
    ));
    props.push(prop(
        S,
        "cauchy_rate",
        errors == 0 && rate <= 1e-12,
        format!("max excess over 2|kappa| 2^-n = {rate:.3e}"),
    ));

    let (mut worst, mut errors) = (0.0f64, 0);
    for s in &samples {
        let scale = 1.0 + s.start().and_then(|z| m.eval_f(z).ok()).map_or(f64::INFINITY, |w| w.norm());
        match (theta_limit(&m, KAPPA, s, TOL, Q, DEFAULT_MAX_DEPTH), conjugacy_residual(&m, KAPPA, s, 30, Q)) {
            (Ok(a), Ok(b)) => worst = worst.max(a.residual.max(b) / scale),
            _ => errors += 1,
        }
    }
    props.push(prop(
        S,
        "functional_equation",
        errors == 0 && worst <= 1e-8,
        format!("max residual / (1 + |F0(z)|) = {worst:.3e}, {errors} errors"),
    ));

    let k = samples.len().min(100);
    props.push(match uniqueness_crosscheck(&m, KAPPA, &samples[..k], TOL, Q) {
        Ok(d) => prop(S, "uniqueness", d <= 1e-8, format!("max discrepancy {d:.3e} on {k} samples")),
        Err(e) => prop(S, "uniqueness", false, e.to_string()),
    });

    props.push(inverse_image(n.min(100), seed));
    props.push(expansion(n * 10, seed));
    props.push(holomorphy(n.min(20), seed));
    props.push(displacement(seed));
    props
}

fn inverse_image(count: usize, seed: u64) -> Property {
    let fk = KappaFamilyMember::new(f0(), KAPPA).expect("kappa is admissible");
    let mut r = rng(seed.wrapping_add(7));
    let (mut worst, mut errors, mut used, mut attempts) = (0.0f64, 0, 0, 0);
    while used < count && attempts < 100 * count {
        attempts += 1;
        let idx: Vec<i64> =
            (0..r.gen_range(1..=3)).map(|_| r.gen_range(12..=30) * if r.gen_bool(0.5) { 1 } else { -1 }).collect();
        let Ok(p) = point_with_address(&fk, &ExternalAddress::from_indices(&idx), 2.0 * Q, 1e-14) else {
            continue;
        };
        used += 1;
        match inverse_theta_check(&f0(), KAPPA, &OrbitSeed::Cycle(p.cycle), TOL, Q) {
            Ok(d) => worst = worst.max(d),
            Err(_) => errors += 1,
        }
    }
    prop(
        "conjugacy",
        "inverse_image",
        used == count && errors == 0 && worst <= 4e-9,
        format!("{used} cycles of F_kappa in J_4, max |Theta(Theta'(w)) - w| = {worst:.3e}, {errors} errors"),
    )
}

fn expansion(pairs: usize, seed: u64) -> Property {
    let m = f0();
    let mut r = rng(seed.wrapping_add(99));
    let (mut worst, mut errors) = (f64::INFINITY, 0);
    for _ in 0..pairs {
        let top = c(r.gen_range(0.5..10.0), r.gen_range(-10.0..10.0));
        let other = top + c(r.gen_range(-0.4..0.4), r.gen_range(-0.4..0.4));
        let address: Vec<i64> = (0..6).map(|_| r.gen_range(-5..=5)).collect();
        let pull = |mut v: ComplexValue| {
            for k in address.iter().rev() {
                v = m.inverse_branch(TractAddress::central(*k), v)?;
            }
            Ok::<_, tractlab_core::Error>(v)
        };
        match (pull(top), pull(other)) {
            (Ok(z), Ok(w)) => match expansion_ratios(&m, z, w, 6) {
                Ok(ratios) => worst = ratios.into_iter().fold(worst, f64::min),
                Err(_) => errors += 1,
            },
            _ => errors += 1,
        }
    }
    prop(
        "conjugacy",
        "expansion",
        errors == 0 && worst >= 1.0 - 1e-9,
        format!("{pairs} same-address pairs, min |F^k z - F^k w| / (2^k |z - w|) = {worst:.6}, {errors} errors"),
    )
}

/// Cycles near the real axis, where the O(h^2) truncation term of the
/// difference quotient stands well above rounding noise.
fn holomorphy(count: usize, seed: u64) -> Property {
    let m = f0();
    let seeds = match periodic_samples(&m, count, 3, (-1, 1), Q, seed.wrapping_add(5)) {
        Ok(s) => s,
        Err(e) => return prop("conjugacy", "holomorphy_in_kappa", false, e.to_string()),
    };
    let (mut lo, mut hi, mut errors) = (f64::INFINITY, 0.0f64, 0);
    for kappa0 in [c(0.0, 0.0), c(0.2, 0.0), c(0.0, 0.2)] {
        for s in &seeds {
            match (holomorphy_in_kappa(&m, s, kappa0, 1e-3, Q, 40), holomorphy_in_kappa(&m, s, kappa0, 5e-4, Q, 40)) {
                (Ok(a), Ok(b)) => {
                    lo = lo.min(a.cr_residual / b.cr_residual);
                    hi = hi.max(a.cr_residual / b.cr_residual);
                }
                _ => errors += 1,
            }
        }
    }
    prop(
        "conjugacy",
        "holomorphy_in_kappa",
        errors == 0 && lo >= 3.0 && hi <= 5.0,
        format!("anti-holomorphic residual ratio for h = 1e-3 vs 5e-4 in [{lo:.3}, {hi:.3}], {errors} errors"),
    )
}

/// Near-real points beyond each floor; the hyperbolic displacement stays under
/// the segment ceiling and shrinks as the floor grows.
fn displacement(seed: u64) -> Property {
    let m = f0();
    let mut maxima = Vec::new();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, floor) in [3.0, 10.0, 20.0].into_iter().enumerate() {
        let pts = box_samples(200, (floor, floor + 5.0), 0.1, seed.wrapping_add(100 + i as u64));
        let (mut max_d, mut min_re, mut used) = (0.0f64, f64::INFINITY, 0);
        for z in pts {
            if let Ok(t) = theta_limit(&m, KAPPA, &OrbitSeed::Point(z), TOL, Q, DEFAULT_MAX_DEPTH) {
                if let Ok(d) = dist_half_plane(Q, t.z, t.theta) {
                    max_d = max_d.max(d);
                    min_re = min_re.min(z.re);
                    used += 1;
                }
            }
        }
        let ceiling = 2.0 * KAPPA.norm() / (min_re - 2.0 * KAPPA.norm() - Q);
        pass &= used > 0 && max_d <= ceiling;
        parts.push(format!("Re >= {floor}: {used} points, max {max_d:.3e} <= {ceiling:.3e}"));
        maxima.push(max_d);
    }
    let shrinking = maxima.windows(2).all(|w| w[1] < w[0]);
    prop("conjugacy", "displacement", pass && shrinking, format!("{}; shrinking: {shrinking}", parts.join("; ")))
}

fn semiconj_suite(n: usize, seed: u64) -> Vec<Property> {
    const S: &str = "semiconj";
    let setup = HyperbolicSetup::default_instance();
    let mu = setup.mu();
    let mut props =
        vec![prop(S, "mu", (mu - (1.0 + setup.m.ln() / 2f64.ln()).ln()).abs() < 1e-15, format!("mu = {mu:.6}"))];
    let cert = match expansion_certificate(
        &setup,
        &default_certificate_samples(&setup),
        CertificateMethod::DiskComplementExact,
    ) {
        Ok(c) => c,
        Err(e) => {
            props.push(prop(S, "certificate", false, e.to_string()));
            return props;
        }
    };
    props.push(prop(S, "certificate", cert.c_hat > 1.0, format!("C = {:.6} at {}", cert.c_hat, cert.worst)));
    let (mut res, mut ratio, mut errors) = (0.0f64, 0.0f64, 0);
    let count = n.min(50);
    for z in escaping_samples(&setup, count, seed.wrapping_add(11)) {
        match semiconj_limit(&setup, Some(&cert), z, 1e-6) {
            Ok(s) => {
                res = res.max(s.residual.unwrap_or(f64::INFINITY) / (1.0 + setup.f(s.theta).norm()));
                for w in s.increments.windows(2).skip(2) {
                    if w[0] > 1e-12 * (1.0 + s.theta.norm()) {
                        ratio = ratio.max(w[1] / w[0]);
                    }
                }
            }
            Err(_) => errors += 1,
        }
    }
    props.push(prop(
        S,
        "functional_equation",
        errors == 0 && res <= 1e-6,
        format!("{count} escaping points, max residual/scale = {res:.3e}, {errors} errors"),
    ));
    props.push(prop(
        S,
        "geometric_decay",
        errors == 0 && ratio <= 1.0 / cert.c_hat + 0.05,
        format!("max increment ratio {ratio:.3e} <= {:.4}", 1.0 / cert.c_hat + 0.05),
    ));
    props
}

fn metric_suite(n: usize, seed: u64) -> Vec<Property> {
    const S: &str = "metric";
    let seq = PunctureSequence::geometric(c(1.0, 0.0), 2.0, 26).expect("geometric sequence is valid");
    let mut r = rng(seed.wrapping_add(3));
    let (mut worst, mut errors) = (0.0f64, 0);
    let count = n * 10;
    for _ in 0..count {
        let z = ComplexValue::from_polar(10f64.powf(r.gen_range(0.0..6.0)), r.gen_range(0.0..std::f64::consts::TAU));
        match punctured_sequence_upper(&seq, z, 1.0) {
            Ok(b) => worst = worst.max(b.bound / z.norm()),
            Err(_) => errors += 1,
        }
    }
    let limit = 1.0 + 6f64.ln();
    let mut props = vec![prop(
        S,
        "linear_density_bound",
        errors == 0 && worst <= limit,
        format!("{count} points, max bound/|z| = {worst:.4} <= {limit:.4}, {errors} errors"),
    )];
    let (mut sym, mut tri) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..count {
        let mut p = || c(r.gen_range(Q + 0.01..Q + 20.0), r.gen_range(-20.0..20.0));
        let (a, b, w) = (p(), p(), p());
        let d = |x, y| dist_half_plane(Q, x, y).unwrap_or(f64::NAN);
        sym = sym.max((d(a, b) - d(b, a)).abs());
        tri = tri.max(d(a, b) - d(a, w) - d(w, b));
    }
    props.push(prop(
        S,
        "half_plane_distance",
        sym <= 1e-12 && tri <= 1e-9,
        format!("max asymmetry {sym:.3e}, max triangle excess {tri:.3e}"),
    ));
    props
}

fn black_subset(small: &ClassGrid, large: &ClassGrid) -> bool {
    small.cells.iter().zip(&large.cells).all(|(a, b)| !a.is_black() || b.is_black())
}

fn render_suite() -> Vec<Property> {
    const S: &str = "render";
    let window = Window { re_min: -4.0, re_max: 4.0, im_min: -4.0, im_max: 4.0 };
    let wide = Window { re_min: -10.0, re_max: 10.0, im_min: -10.0, im_max: 10.0 };
    let f4 = EntireMapSpec::ExpPlusKappa { kappa: c(1.0038, 2.8999) };
    let f3 = EntireMapSpec::Sinh { lambda: c(0.575, 0.0) };
    let grid = |map: &EntireMapSpec, w: &Window, horizon| classify_grid(map, w, (128, 128), 50.0, horizon);
    let (Ok(g4), Ok(g3), Ok(g4_again)) = (grid(&f4, &window, 30), grid(&f3, &wide, 30), grid(&f4, &window, 30)) else {
        return vec![prop(S, "grids", false, "classification failed".into())];
    };
    let right = (0..g4.height).any(|j| g4.get(g4.width - 1, j).is_black());
    let symmetric =
        (0..g3.height).all(|j| (0..g3.width).all(|i| g3.get(i, j) == g3.get(g3.width - 1 - i, g3.height - 1 - j)));
    let mut nested = true;
    for map in [&f4, &f3] {
        match (grid(map, &window, 10), grid(map, &window, 20), grid(map, &window, 30)) {
            (Ok(a), Ok(b), Ok(c)) => nested &= black_subset(&c, &b) && black_subset(&b, &a),
            _ => nested = false,
        }
    }
    vec![
        prop(
            S,
            "f4_black_set",
            g4.black_count() > 0 && right,
            format!("{} black pixels, touches right edge: {right}", g4.black_count()),
        ),
        prop(
            S,
            "f3_symmetry",
            symmetric && g3.black_count() > 0,
            format!("{} black pixels in [-10, 10]^2, symmetric: {symmetric}", g3.black_count()),
        ),
        prop(S, "horizon_monotone", nested, format!("black sets nested for horizons 10, 20, 30: {nested}")),
        prop(S, "deterministic", g4 == g4_again, "repeated parallel render is identical".into()),
    ]
}
