use std::path::PathBuf;

use serde::Serialize;
use tractlab_core::complex::ComplexValue;
use tractlab_core::samples::escaping_samples;
use tractlab_core::semiconj::{
    default_certificate_samples, expansion_certificate, semiconj_batch, semiconj_depth, CertificateMethod,
    ExpansionCertificate, HyperbolicSetup, SemiconjSample,
};

use crate::config::{SampleSpec, SemiconjSection};
use crate::error::{config_err, CliError, CliResult};
use crate::output::write_json;

#[derive(Clone, Debug)]
pub struct SemiconjJob {
    pub setup: HyperbolicSetup,
    pub tol: f64,
    pub method: CertificateMethod,
    pub samples: SampleSpec,
    pub out: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointError {
    pub index: usize,
    pub z: ComplexValue,
    pub error: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SemiconjSummary {
    pub count: usize,
    pub failed: usize,
    pub mu: f64,
    pub depth: usize,
    /// `max |f(theta(z)) - theta(g(z))| / (1 + |f(theta(z))|)`.
    pub max_scaled_residual: f64,
    /// Largest ratio of consecutive increments after level 2.
    pub max_increment_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SemiconjReport {
    pub setup: HyperbolicSetup,
    pub tol: f64,
    pub certificate: ExpansionCertificate,
    pub summary: SemiconjSummary,
    pub samples: Vec<SemiconjSample>,
    pub errors: Vec<PointError>,
}

impl SemiconjJob {
    pub fn from_section(s: &SemiconjSection) -> CliResult<Self> {
        let lambda = match &s.lambda {
            Some(l) => l.value("semiconj.lambda")?,
            None => ComplexValue::new(0.5, 0.0),
        };
        let setup = HyperbolicSetup::new(lambda, s.r_u.unwrap_or(0.7), s.k.unwrap_or(2.0), s.r.unwrap_or(11.0))
            .map_err(|e| config_err("semiconj", e))?;
        let tol = s.tol.unwrap_or(1e-6);
        if !(tol > 0.0) {
            return Err(config_err("semiconj.tol", format!("must be positive, got {tol}")));
        }
        if let Some(CertificateMethod::TwoPuncture { k }) = s.method {
            if !(k >= 1.0) {
                return Err(config_err("semiconj.method.k", format!("must be at least 1, got {k}")));
            }
        }
        let samples = match &s.samples {
            Some(src) => src.load()?,
            None => SampleSpec { random: Some(random_default()), ..SampleSpec::default() },
        };
        if !samples.addresses.is_empty() {
            return Err(config_err("semiconj.samples.addresses", "not used by the semiconjugacy"));
        }
        for (i, p) in samples.points.iter().enumerate() {
            p.value(&format!("semiconj.samples.points[{i}]"))?;
        }
        let out = s.out.clone().ok_or_else(|| config_err("semiconj.out", "required"))?;
        Ok(Self { setup, tol, method: s.method.unwrap_or_default(), samples, out })
    }

    pub fn points(&self) -> CliResult<Vec<ComplexValue>> {
        let mut pts = Vec::new();
        for (i, p) in self.samples.points.iter().enumerate() {
            pts.push(p.value(&format!("samples.points[{i}]"))?);
        }
        if let Some(r) = &self.samples.random {
            pts.extend(escaping_samples(&self.setup, r.count, r.seed));
        }
        Ok(pts)
    }

    pub fn run(&self) -> CliResult<SemiconjReport> {
        let certificate = expansion_certificate(&self.setup, &default_certificate_samples(&self.setup), self.method)?;
        let depth = semiconj_depth(self.setup.mu(), certificate.c_hat, self.tol)?;
        let points = self.points()?;
        let results = semiconj_batch(&self.setup, Some(&certificate), &points, self.tol);
        let mut samples = Vec::new();
        let mut errors = Vec::new();
        for (index, (z, r)) in points.iter().zip(results).enumerate() {
            match r {
                Ok(s) => samples.push(s),
                Err(e) => errors.push(PointError { index, z: *z, error: e.to_string() }),
            }
        }
        let mut summary = SemiconjSummary {
            count: points.len(),
            failed: errors.len(),
            mu: self.setup.mu(),
            depth,
            ..Default::default()
        };
        for s in &samples {
            if let Some(r) = s.residual {
                summary.max_scaled_residual = summary.max_scaled_residual.max(r / (1.0 + self.setup.f(s.theta).norm()));
            }
            for w in s.increments.windows(2).skip(2) {
                if w[0] > 1e-12 * (1.0 + s.theta.norm()) {
                    summary.max_increment_ratio = summary.max_increment_ratio.max(w[1] / w[0]);
                }
            }
        }
        let report = SemiconjReport { setup: self.setup.clone(), tol: self.tol, certificate, summary, samples, errors };
        write_json(&self.out, &report)?;
        if let Some(first) = report.errors.first() {
            return Err(CliError::Computation(format!(
                "{} of {} points failed; first: point {} ({}): {}",
                report.errors.len(),
                report.summary.count,
                first.index,
                first.z,
                first.error
            )));
        }
        Ok(report)
    }
}

fn random_default() -> crate::config::RandomSamples {
    crate::config::RandomSamples { count: 50, max_period: 1, entries: (0, 0), seed: 0 }
}
