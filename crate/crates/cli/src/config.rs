//! JSON run configuration. Every subcommand flag has a field of the same name
//! in that subcommand's section; a flag overrides the file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tractlab_core::catalog::{EntireMapSpec, ModelDescriptor};
use tractlab_core::complex::{parse_complex, ComplexValue};
use tractlab_core::orbits::Window;
use tractlab_core::semiconj::CertificateMethod;

use crate::error::{config_err, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Render,
    Conjugate,
    Semiconj,
    Verify,
    Report,
}

/// A complex number written as `"0.3+0.2i"`, `[0.3, 0.2]` or a real number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Pair([f64; 2]),
    Real(f64),
    Text(String),
}

impl ComplexInput {
    pub fn value(&self, field: &str) -> CliResult<ComplexValue> {
        let z = match self {
            Self::Pair([re, im]) => ComplexValue::new(*re, *im),
            Self::Real(re) => ComplexValue::new(*re, 0.0),
            Self::Text(s) => parse_complex(s).map_err(|e| config_err(field, e))?,
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(config_err(field, "must be finite"));
        }
        Ok(z)
    }
}

/// Sample points for the conjugacy and semiconjugacy runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    /// Explicit starting points; their orbits are iterated forward.
    #[serde(default)]
    pub points: Vec<ComplexInput>,
    /// Periodic addresses (branch indices of one period); each gives a cycle.
    #[serde(default)]
    pub addresses: Vec<Vec<i64>>,
    #[serde(default)]
    pub random: Option<RandomSamples>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSamples {
    pub count: usize,
    #[serde(default = "default_max_period")]
    pub max_period: usize,
    #[serde(default = "default_entries")]
    pub entries: (i64, i64),
    #[serde(default)]
    pub seed: u64,
}

fn default_max_period() -> usize {
    3
}

fn default_entries() -> (i64, i64) {
    (-5, 5)
}

/// Samples given inline or as a path to a JSON file holding a [`SampleSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleSource {
    Inline(SampleSpec),
    File(PathBuf),
}

impl SampleSource {
    pub fn load(&self) -> CliResult<SampleSpec> {
        match self {
            Self::Inline(s) => Ok(s.clone()),
            Self::File(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| config_err("samples", format!("{}: {e}", p.display())))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSection {
    pub map: Option<EntireMapSpec>,
    pub window: Option<Window>,
    pub resolution: Option<(usize, usize)>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub horizon: Option<usize>,
    pub out: Option<PathBuf>,
    pub png: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ConjugacyCheck {
    Uniqueness,
    Inverse,
    Holomorphy,
    Displacement,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateSection {
    pub model: Option<ModelDescriptor>,
    pub kappa: Option<ComplexInput>,
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    pub tol: Option<f64>,
    pub max_depth: Option<usize>,
    pub samples: Option<SampleSource>,
    pub checks: Option<Vec<ConjugacyCheck>>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiconjSection {
    pub lambda: Option<ComplexInput>,
    #[serde(rename = "r_U")]
    pub r_u: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub tol: Option<f64>,
    pub samples: Option<SampleSource>,
    pub method: Option<CertificateMethod>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Conjugacy,
    Semiconj,
    Metric,
    Render,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub suite: Option<Suite>,
    /// Samples per property.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    #[serde(default)]
    pub render: Option<RenderSection>,
    #[serde(default)]
    pub conjugate: Option<ConjugateSection>,
    #[serde(default)]
    pub semiconj: Option<SemiconjSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| config_err("config", format!("{}: {e}", path.display())))
    }

    /// A config naming a different command than the one invoked is rejected.
    pub fn expect_command(&self, invoked: CommandName) -> CliResult<()> {
        match self.command {
            Some(c) if c != invoked && invoked != CommandName::Report => Err(config_err(
                "command",
                format!("config is for '{c:?}' but '{invoked:?}' was invoked").to_lowercase(),
            )),
            _ => Ok(()),
        }
    }
}

/// `"re_min,re_max,im_min,im_max"`.
pub fn parse_window(s: &str) -> Result<Window, String> {
    let v: Vec<f64> =
        s.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    match v.as_slice() {
        [a, b, c, d] => Window::new(*a, *b, *c, *d).map_err(|e| e.to_string()),
        _ => Err("expected re_min,re_max,im_min,im_max".into()),
    }
}

/// `"WIDTHxHEIGHT"`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    Ok((w.trim().parse().map_err(|e| format!("{e}"))?, h.trim().parse().map_err(|e| format!("{e}"))?))
}

pub fn parse_json_arg<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

pub fn parse_complex_arg(s: &str) -> Result<ComplexInput, String> {
    parse_complex(s).map_err(|e| e.to_string())?;
    Ok(ComplexInput::Text(s.to_string()))
}

pub fn parse_sample_source(s: &str) -> Result<SampleSource, String> {
    Ok(SampleSource::File(PathBuf::from(s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_inputs() {
        let z: ComplexInput = serde_json::from_str("\"0.3+0.2i\"").unwrap();
        assert_eq!(z.value("k").unwrap(), ComplexValue::new(0.3, 0.2));
        let z: ComplexInput = serde_json::from_str("[0.3, 0.2]").unwrap();
        assert_eq!(z.value("k").unwrap(), ComplexValue::new(0.3, 0.2));
        let z: ComplexInput = serde_json::from_str("2").unwrap();
        assert_eq!(z.value("k").unwrap(), ComplexValue::new(2.0, 0.0));
        assert!(ComplexInput::Text("abc".into()).value("kappa").unwrap_err().to_string().contains("kappa"));
    }

    #[test]
    fn sections_parse() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"command": "render",
                "render": {"map": {"family": "sinh", "lambda": [0.575, 0.0]},
                           "window": {"re_min": -4, "re_max": 4, "im_min": -4, "im_max": 4},
                           "resolution": [64, 64], "R": 50, "horizon": 30, "out": "a.pgm"},
                "conjugate": {"kappa": "0.3+0.2i", "Q": 2, "samples": {"random": {"count": 3}}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.command, Some(CommandName::Render));
        assert_eq!(cfg.render.unwrap().resolution, Some((64, 64)));
        let conj = cfg.conjugate.unwrap();
        assert!(matches!(conj.samples, Some(SampleSource::Inline(_))));
        assert!(serde_json::from_str::<RunConfig>(r#"{"render": {"bogus": 1}}"#).is_err());
    }

    #[test]
    fn flag_parsers() {
        assert_eq!(parse_resolution("256x128"), Ok((256, 128)));
        assert!(parse_resolution("256").is_err());
        assert!(parse_window("-4,4,-4,4").is_ok());
        assert!(parse_window("4,-4,-4,4").is_err());
    }
}
