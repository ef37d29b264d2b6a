pub mod conjugate;
pub mod render;
pub mod semiconj;
pub mod verify;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::write_json;

#[derive(Clone, Debug, Serialize)]
pub struct SectionOutcome {
    pub section: &'static str,
    pub ok: bool,
    pub artifacts: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
}

fn in_dir(dir: &Path, path: Option<&PathBuf>, default: &str) -> PathBuf {
    let name = path.and_then(|p| p.file_name()).map_or_else(|| default.into(), |n| n.to_owned());
    dir.join(name)
}

/// Runs every section present in the config, writing artifacts into `dir`
/// and an index `summary.json`. All sections are validated before any runs.
pub fn report(config: &RunConfig, dir: &Path) -> CliResult<Vec<SectionOutcome>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let render_job = config
        .render
        .as_ref()
        .map(|s| {
            let mut s = s.clone();
            s.out = Some(in_dir(dir, s.out.as_ref(), "render.pgm"));
            s.png = s.png.as_ref().map(|p| in_dir(dir, Some(p), "render.png"));
            render::RenderJob::from_section(&s)
        })
        .transpose()?;
    let conj_job = config
        .conjugate
        .as_ref()
        .map(|s| {
            let mut s = s.clone();
            s.out = Some(in_dir(dir, s.out.as_ref(), "conjugacy.json"));
            s.csv = Some(in_dir(dir, s.csv.as_ref(), "conjugacy.csv"));
            conjugate::ConjugateJob::from_section(&s)
        })
        .transpose()?;
    let semi_job = config
        .semiconj
        .as_ref()
        .map(|s| {
            let mut s = s.clone();
            s.out = Some(in_dir(dir, s.out.as_ref(), "semiconj.json"));
            semiconj::SemiconjJob::from_section(&s)
        })
        .transpose()?;
    let verify_job = config
        .verify
        .as_ref()
        .map(|s| {
            let mut s = s.clone();
            s.out = Some(in_dir(dir, s.out.as_ref(), "verify.json"));
            verify::VerifyJob::from_section(&s)
        })
        .transpose()?;
    if render_job.is_none() && conj_job.is_none() && semi_job.is_none() && verify_job.is_none() {
        return Err(CliError::Config("config: report needs at least one section".into()));
    }

    let mut outcomes = Vec::new();
    let mut record = |section, artifacts: Vec<PathBuf>, r: CliResult<()>| {
        outcomes.push(SectionOutcome {
            section,
            ok: r.is_ok(),
            artifacts,
            exit_code: r.as_ref().err().map(CliError::exit_code),
            error: r.err().map(|e| e.to_string()),
        });
    };
    if let Some(job) = render_job {
        let mut files = vec![job.out.clone(), render::sidecar_path(&job.out)];
        files.extend(job.png.clone());
        record("render", files, job.run().map(|_| ()));
    }
    if let Some(job) = conj_job {
        let files = std::iter::once(job.out.clone()).chain(job.csv.clone()).collect();
        record("conjugate", files, job.run().map(|_| ()));
    }
    if let Some(job) = semi_job {
        record("semiconj", vec![job.out.clone()], job.run().map(|_| ()));
    }
    if let Some(job) = verify_job {
        record("verify", job.out.clone().into_iter().collect(), job.run().map(|_| ()));
    }
    write_json(&dir.join("summary.json"), &outcomes)?;
    match outcomes.iter().filter_map(|o| o.exit_code).max() {
        None => Ok(outcomes),
        Some(3) => Err(CliError::Verification("see summary.json".into())),
        Some(_) => {
            Err(CliError::Computation(outcomes.iter().filter_map(|o| o.error.clone()).collect::<Vec<_>>().join("; ")))
        }
    }
}
