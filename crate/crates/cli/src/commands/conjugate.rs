use std::path::PathBuf;

use serde::Serialize;
use tractlab_core::catalog::{LogLiftModel, ModelDescriptor};
use tractlab_core::complex::ComplexValue;
use tractlab_core::conjugacy::{
    check_kappa_precondition, displacement_bound_report, holomorphy_in_kappa, inverse_theta_check, required_depth,
    theta_limit, theta_limit_batch, uniqueness_crosscheck, ConjugacySample, OrbitSeed,
};
use tractlab_core::orbits::{point_with_address, ExternalAddress};
use tractlab_core::samples::periodic_samples;
use tractlab_core::Error;

use crate::config::{ConjugacyCheck, ConjugateSection, RandomSamples, SampleSource, SampleSpec};
use crate::error::{config_err, CliError, CliResult};
use crate::output::write_json;

const ALL_CHECKS: [ConjugacyCheck; 4] =
    [ConjugacyCheck::Uniqueness, ConjugacyCheck::Inverse, ConjugacyCheck::Holomorphy, ConjugacyCheck::Displacement];

/// A validated conjugacy request.
#[derive(Clone, Debug)]
pub struct ConjugateJob {
    pub model: LogLiftModel,
    pub kappa: ComplexValue,
    pub q: f64,
    pub tol: f64,
    pub max_depth: usize,
    pub depth: usize,
    pub samples: SampleSpec,
    pub checks: Vec<ConjugacyCheck>,
    pub out: PathBuf,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleError {
    pub index: usize,
    pub seed: OrbitSeed,
    pub error: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub count: usize,
    pub failed: usize,
    pub max_residual: f64,
    pub max_displacement_euclidean: f64,
    pub max_tail_bound: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckSummaries {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<CheckValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse: Option<InverseSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holomorphy: Option<HolomorphySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub displacement: Option<DisplacementSummary>,
}

/// Largest discrepancy, or the error that stopped the check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckValue {
    pub max_discrepancy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct InverseSummary {
    /// Samples whose image `Theta(z)` lies in `J_{2Q}(F_kappa)`.
    pub checked: usize,
    /// Images leaving `J_{2Q}(F_kappa)`, where the check does not apply.
    pub skipped: usize,
    pub max_discrepancy: f64,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HolomorphySummary {
    pub max_cr_residual_h: f64,
    pub max_cr_residual_half_h: f64,
    pub h: f64,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DisplacementSummary {
    pub max_distance: Option<f64>,
    /// `2|kappa| / (min Re z - 2|kappa| - Q)` when the denominator is positive.
    pub ceiling: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyReport {
    pub model: ModelDescriptor,
    pub kappa: ComplexValue,
    #[serde(rename = "Q")]
    pub q: f64,
    pub tol: f64,
    pub depth: usize,
    pub summary: Summary,
    pub checks: CheckSummaries,
    pub samples: Vec<ConjugacySample>,
    pub errors: Vec<SampleError>,
}

#[derive(Serialize)]
struct CsvRow {
    index: usize,
    z_re: f64,
    z_im: f64,
    theta_re: f64,
    theta_im: f64,
    depth: usize,
    tail_bound: f64,
    residual: f64,
    displacement: Option<f64>,
    address: String,
}

impl ConjugateJob {
    /// Validates every field before any iteration runs.
    pub fn from_section(s: &ConjugateSection) -> CliResult<Self> {
        let descriptor =
            s.model.clone().unwrap_or(ModelDescriptor::ShiftedExp { r: 10.0, half_plane_q: None, offset: 0.0 });
        let model = LogLiftModel::from_descriptor(&descriptor).map_err(|e| config_err("conjugate.model", e))?;
        let kappa =
            s.kappa.as_ref().ok_or_else(|| config_err("conjugate.kappa", "required"))?.value("conjugate.kappa")?;
        let q = s.q.unwrap_or(2.0);
        if !q.is_finite() {
            return Err(config_err("conjugate.Q", "must be finite"));
        }
        check_kappa_precondition(kappa, q).map_err(|e| config_err("conjugate.Q", e))?;
        let tol = s.tol.unwrap_or(1e-9);
        let depth = required_depth(kappa, tol).map_err(|e| config_err("conjugate.tol", e))?;
        let max_depth = s.max_depth.unwrap_or(tractlab_core::conjugacy::DEFAULT_MAX_DEPTH);
        if depth > max_depth {
            return Err(config_err("conjugate.tol", format!("needs depth {depth}, above max_depth {max_depth}")));
        }
        let samples = match &s.samples {
            Some(src) => src.load()?,
            None => SampleSource::Inline(SampleSpec {
                random: Some(RandomSamples { count: 100, max_period: 3, entries: (-5, 5), seed: 0 }),
                ..SampleSpec::default()
            })
            .load()?,
        };
        validate_samples(&samples, "conjugate.samples")?;
        let out = s.out.clone().ok_or_else(|| config_err("conjugate.out", "required"))?;
        Ok(Self {
            model,
            kappa,
            q,
            tol,
            max_depth,
            depth,
            samples,
            checks: s.checks.clone().unwrap_or_else(|| ALL_CHECKS.to_vec()),
            out,
            csv: s.csv.clone(),
        })
    }

    /// Orbit seeds in the order: points, addresses, random cycles.
    pub fn seeds(&self) -> CliResult<Vec<OrbitSeed>> {
        let mut seeds = Vec::new();
        for (i, p) in self.samples.points.iter().enumerate() {
            seeds.push(OrbitSeed::Point(p.value(&format!("samples.points[{i}]"))?));
        }
        for (i, a) in self.samples.addresses.iter().enumerate() {
            let p = point_with_address(&self.model, &ExternalAddress::from_indices(a), self.q, 1e-14)
                .map_err(|e| CliError::Computation(format!("samples.addresses[{i}] = {a:?}: {e}")))?;
            seeds.push(OrbitSeed::Cycle(p.cycle));
        }
        if let Some(r) = &self.samples.random {
            let cycles = periodic_samples(&self.model, r.count, r.max_period, r.entries, self.q, r.seed)
                .map_err(|e| CliError::Computation(format!("samples.random: {e}")))?;
            seeds.extend(cycles);
        }
        Ok(seeds)
    }

    pub fn run(&self) -> CliResult<ConjugacyReport> {
        let seeds = self.seeds()?;
        let results = theta_limit_batch(&self.model, self.kappa, &seeds, self.tol, self.q, self.max_depth);
        let mut samples = Vec::new();
        let mut ok_seeds = Vec::new();
        let mut errors = Vec::new();
        for (index, (seed, r)) in seeds.iter().zip(results).enumerate() {
            match r {
                Ok(s) => {
                    samples.push(s);
                    ok_seeds.push(seed.clone());
                }
                Err(e) => errors.push(SampleError { index, seed: seed.clone(), error: e.to_string() }),
            }
        }
        let summary = Summary {
            count: seeds.len(),
            failed: errors.len(),
            max_residual: samples.iter().map(|s| s.residual).fold(0.0, f64::max),
            max_displacement_euclidean: samples.iter().map(|s| (s.theta - s.z).norm()).fold(0.0, f64::max),
            max_tail_bound: samples.iter().map(|s| s.tail_bound).fold(0.0, f64::max),
        };
        let checks = self.checks(&ok_seeds, &samples);
        let report = ConjugacyReport {
            model: self.model.descriptor(),
            kappa: self.kappa,
            q: self.q,
            tol: self.tol,
            depth: self.depth,
            summary,
            checks,
            samples,
            errors,
        };
        write_json(&self.out, &report)?;
        if let Some(csv_path) = &self.csv {
            write_csv(csv_path, &report.samples)?;
        }
        if let Some(first) = report.errors.first() {
            return Err(CliError::Computation(format!(
                "{} of {} samples failed; first: sample {} ({:?}): {}",
                report.errors.len(),
                report.summary.count,
                first.index,
                first.seed,
                first.error
            )));
        }
        Ok(report)
    }

    fn checks(&self, seeds: &[OrbitSeed], samples: &[ConjugacySample]) -> CheckSummaries {
        let mut out = CheckSummaries::default();
        for check in &self.checks {
            match check {
                ConjugacyCheck::Uniqueness => {
                    let r = uniqueness_crosscheck(&self.model, self.kappa, seeds, self.tol, self.q);
                    out.uniqueness = Some(CheckValue {
                        max_discrepancy: r.as_ref().ok().copied(),
                        error: r.err().map(|e| e.to_string()),
                    });
                }
                ConjugacyCheck::Inverse => out.inverse = Some(self.inverse(seeds)),
                ConjugacyCheck::Holomorphy => out.holomorphy = Some(self.holomorphy(seeds)),
                ConjugacyCheck::Displacement => {
                    let r = displacement_bound_report(samples, self.q);
                    let min_re = samples.iter().map(|s| s.z.re).fold(f64::INFINITY, f64::min);
                    let denom = min_re - 2.0 * self.kappa.norm() - self.q;
                    out.displacement = Some(DisplacementSummary {
                        max_distance: r.as_ref().ok().map(|d| d.max_distance),
                        ceiling: (denom > 0.0 && denom.is_finite()).then(|| 2.0 * self.kappa.norm() / denom),
                        error: r.err().map(|e| e.to_string()),
                    });
                }
            }
        }
        out
    }

    /// Images `w = Theta(z)` carry their own `F_kappa` orbits; each is pulled
    /// back through `Theta'` and pushed forward again.
    fn inverse(&self, seeds: &[OrbitSeed]) -> InverseSummary {
        let mut s = InverseSummary::default();
        for (i, seed) in seeds.iter().enumerate() {
            let image = |seed: &OrbitSeed| {
                theta_limit(&self.model, self.kappa, seed, self.tol, self.q, self.max_depth).map(|t| t.theta)
            };
            let w_seed = match seed {
                OrbitSeed::Point(_) => image(seed).map(OrbitSeed::Point),
                OrbitSeed::Cycle(c) => (0..c.len())
                    .map(|k| image(&OrbitSeed::Cycle(c[k..].iter().chain(&c[..k]).copied().collect())))
                    .collect::<Result<Vec<_>, _>>()
                    .map(OrbitSeed::Cycle),
                OrbitSeed::Explicit(_) => {
                    s.skipped += 1;
                    continue;
                }
            };
            match w_seed.and_then(|w| inverse_theta_check(&self.model, self.kappa, &w, self.tol, self.q)) {
                Ok(d) => {
                    s.checked += 1;
                    s.max_discrepancy = s.max_discrepancy.max(d);
                }
                Err(Error::OrbitLeftJQ { .. } | Error::PullbackLeftDomain(_)) => s.skipped += 1,
                Err(e) => s.errors.push(format!("sample {i}: {e}")),
            }
        }
        s
    }

    fn holomorphy(&self, seeds: &[OrbitSeed]) -> HolomorphySummary {
        let h = 1e-3;
        let depth = self.depth.max(1);
        let mut s = HolomorphySummary { h, ..Default::default() };
        for (i, seed) in seeds.iter().enumerate() {
            let a = holomorphy_in_kappa(&self.model, seed, self.kappa, h, self.q, depth);
            let b = holomorphy_in_kappa(&self.model, seed, self.kappa, h / 2.0, self.q, depth);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    s.max_cr_residual_h = s.max_cr_residual_h.max(a.cr_residual);
                    s.max_cr_residual_half_h = s.max_cr_residual_half_h.max(b.cr_residual);
                }
                (Err(e), _) | (_, Err(e)) => s.errors.push(format!("sample {i}: {e}")),
            }
        }
        s
    }
}

pub fn validate_samples(s: &SampleSpec, field: &str) -> CliResult<()> {
    for (i, p) in s.points.iter().enumerate() {
        p.value(&format!("{field}.points[{i}]"))?;
    }
    if let Some(i) = s.addresses.iter().position(|a| a.is_empty()) {
        return Err(config_err(&format!("{field}.addresses[{i}]"), "period must be at least 1"));
    }
    if let Some(r) = &s.random {
        if r.max_period == 0 {
            return Err(config_err(&format!("{field}.random.max_period"), "must be at least 1"));
        }
        if r.entries.0 > r.entries.1 {
            return Err(config_err(&format!("{field}.random.entries"), "lower bound exceeds upper bound"));
        }
    }
    Ok(())
}

fn write_csv(path: &std::path::Path, samples: &[ConjugacySample]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e.into()))?;
    for (index, s) in samples.iter().enumerate() {
        let address = s.address_prefix.indices().iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        w.serialize(CsvRow {
            index,
            z_re: s.z.re,
            z_im: s.z.im,
            theta_re: s.theta.re,
            theta_im: s.theta.im,
            depth: s.depth,
            tail_bound: s.tail_bound,
            residual: s.residual,
            displacement: s.displacement,
            address,
        })
        .map_err(|e| CliError::io(path, e.into()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
