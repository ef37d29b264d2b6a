//! Command-line front end: argument and config parsing, experiment
//! orchestration and artifact emission.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tractlab_core::catalog::{EntireMapSpec, ModelDescriptor};
use tractlab_core::orbits::Window;
use tractlab_core::semiconj::CertificateMethod;

use crate::commands::{conjugate, render, report, semiconj, verify};
use crate::config::{
    parse_complex_arg, parse_json_arg, parse_resolution, parse_sample_source, parse_window, CommandName, ComplexInput,
    ConjugacyCheck, RunConfig, SampleSource, Suite,
};
use crate::error::{config_err, CliResult};

pub const THREADS_ENV: &str = "TRACTLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tractlab", version, about = "Logarithmic-coordinate dynamics experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a pixel grid by finite-horizon escape and write PGM (and PNG).
    Render(RenderArgs),
    /// Compute the pullback conjugacy on samples and write JSON/CSV reports.
    Conjugate(ConjugateArgs),
    /// Compute the curve-lifting semiconjugacy on samples and write a JSON report.
    Semiconj(SemiconjArgs),
    /// Run the invariant suite and print one line per property.
    Verify(VerifyArgs),
    /// Run every section of a config file into one output directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Map descriptor as JSON, e.g. '{"family":"sinh","lambda":[0.575,0]}'.
    #[arg(long, value_parser = parse_json_arg::<EntireMapSpec>)]
    pub map: Option<EntireMapSpec>,
    /// re_min,re_max,im_min,im_max
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<Window>,
    /// WIDTHxHEIGHT
    #[arg(long, value_parser = parse_resolution)]
    pub resolution: Option<(usize, usize)>,
    /// Escape radius.
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub png: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConjugateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base model descriptor as JSON; defaults to the shifted exponential with R = 10.
    #[arg(long, value_parser = parse_json_arg::<ModelDescriptor>)]
    pub model: Option<ModelDescriptor>,
    #[arg(long, value_parser = parse_complex_arg, allow_hyphen_values = true)]
    pub kappa: Option<ComplexInput>,
    #[arg(long = "Q")]
    pub q: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Path to a samples JSON file: {"points": [...], "addresses": [...], "random": {...}}.
    #[arg(long, value_parser = parse_sample_source)]
    pub samples: Option<SampleSource>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub checks: Option<Vec<ConjugacyCheck>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SemiconjArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_complex_arg, allow_hyphen_values = true)]
    pub lambda: Option<ComplexInput>,
    #[arg(long = "r_U")]
    pub r_u: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_parser = parse_sample_source)]
    pub samples: Option<SampleSource>,
    /// Certificate method as JSON, e.g. '{"method":"two_puncture","k":1}'.
    #[arg(long, value_parser = parse_json_arg::<CertificateMethod>)]
    pub method: Option<CertificateMethod>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Samples per property.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the results as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn pick<T: Clone>(flag: &Option<T>, file: Option<&T>) -> Option<T> {
    flag.clone().or_else(|| file.cloned())
}

/// Builds the rayon pool from `TRACTLAB_THREADS`; unset means hardware parallelism.
pub fn init_threads(value: Option<&str>) -> CliResult<()> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|e| config_err(THREADS_ENV, e))?;
    if n == 0 {
        return Err(config_err(THREADS_ENV, "must be at least 1"));
    }
    // A pool built earlier in the same process stays in place.
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("global thread pool already initialized");
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    init_threads(std::env::var(THREADS_ENV).ok().as_deref())?;
    match &cli.command {
        Command::Render(a) => {
            let cfg = RunConfig::load(a.config.as_deref())?;
            cfg.expect_command(CommandName::Render)?;
            let file = cfg.render.unwrap_or_default();
            let section = config::RenderSection {
                map: pick(&a.map, file.map.as_ref()),
                window: pick(&a.window, file.window.as_ref()),
                resolution: pick(&a.resolution, file.resolution.as_ref()),
                r: pick(&a.r, file.r.as_ref()),
                horizon: pick(&a.horizon, file.horizon.as_ref()),
                out: pick(&a.out, file.out.as_ref()),
                png: pick(&a.png, file.png.as_ref()),
            };
            let summary = render::RenderJob::from_section(&section)?.run()?;
            println!("{}", serde_json::to_string(&summary).unwrap_or_default());
        }
        Command::Conjugate(a) => {
            let cfg = RunConfig::load(a.config.as_deref())?;
            cfg.expect_command(CommandName::Conjugate)?;
            let file = cfg.conjugate.unwrap_or_default();
            let section = config::ConjugateSection {
                model: pick(&a.model, file.model.as_ref()),
                kappa: pick(&a.kappa, file.kappa.as_ref()),
                q: pick(&a.q, file.q.as_ref()),
                tol: pick(&a.tol, file.tol.as_ref()),
                max_depth: pick(&a.max_depth, file.max_depth.as_ref()),
                samples: pick(&a.samples, file.samples.as_ref()),
                checks: pick(&a.checks, file.checks.as_ref()),
                out: pick(&a.out, file.out.as_ref()),
                csv: pick(&a.csv, file.csv.as_ref()),
            };
            let report = conjugate::ConjugateJob::from_section(&section)?.run()?;
            println!("{}", serde_json::to_string(&report.summary).unwrap_or_default());
        }
        Command::Semiconj(a) => {
            let cfg = RunConfig::load(a.config.as_deref())?;
            cfg.expect_command(CommandName::Semiconj)?;
            let file = cfg.semiconj.unwrap_or_default();
            let section = config::SemiconjSection {
                lambda: pick(&a.lambda, file.lambda.as_ref()),
                r_u: pick(&a.r_u, file.r_u.as_ref()),
                k: pick(&a.k, file.k.as_ref()),
                r: pick(&a.r, file.r.as_ref()),
                tol: pick(&a.tol, file.tol.as_ref()),
                samples: pick(&a.samples, file.samples.as_ref()),
                method: pick(&a.method, file.method.as_ref()),
                out: pick(&a.out, file.out.as_ref()),
            };
            let report = semiconj::SemiconjJob::from_section(&section)?.run()?;
            println!("{}", serde_json::to_string(&report.summary).unwrap_or_default());
        }
        Command::Verify(a) => {
            let cfg = RunConfig::load(a.config.as_deref())?;
            cfg.expect_command(CommandName::Verify)?;
            let file = cfg.verify.unwrap_or_default();
            let section = config::VerifySection {
                suite: pick(&a.suite, file.suite.as_ref()),
                samples: pick(&a.samples, file.samples.as_ref()),
                seed: pick(&a.seed, file.seed.as_ref()),
                out: pick(&a.out, file.out.as_ref()),
            };
            verify::VerifyJob::from_section(&section)?.run()?;
        }
        Command::Report(a) => {
            let cfg = RunConfig::load(Some(&a.config))?;
            report(&cfg, &a.out_dir)?;
        }
    }
    Ok(())
}

/// Parses arguments, runs, reports errors on stderr and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tractlab: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::CliError;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Computation("x".into()).exit_code(), 2);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 3);
    }

    #[test]
    fn thread_setting() {
        assert!(init_threads(None).is_ok());
        assert!(init_threads(Some("0")).is_err());
        assert!(init_threads(Some("many")).is_err());
        assert!(init_threads(Some("2")).is_ok());
    }

    #[test]
    fn bad_flag_is_config_error() {
        assert_eq!(run(["tractlab", "render", "--resolution", "abc"]), 1);
        assert_eq!(
            run(["tractlab", "conjugate", "--kappa", "0.3+0.2i", "--Q", "1.5", "--out", "/nonexistent/x.json"]),
            1
        );
    }
}
