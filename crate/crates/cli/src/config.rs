use std::path::{Path, PathBuf};

use serde::Deserialize;
use wickward::coeff::{format_number, int, is_unit_modulus};
use wickward::dsl::{parse_and_eval, Value};
use wickward::Number;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Dot,
}

/// Keys accepted in a `--config` TOML file; each mirrors a global flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dim: Option<u32>,
    pub format: Option<OutputFormat>,
    pub trace: Option<bool>,
    pub out: Option<PathBuf>,
    pub eta: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dimension: u32,
    pub eta: Number,
    pub format: OutputFormat,
    pub trace: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { dimension: 4, eta: int(1), format: OutputFormat::Text, trace: false, out: None }
    }
}

impl RunConfig {
    /// Flags win over the config file, which wins over the defaults.
    pub fn resolve(flags: FileConfig, file: FileConfig) -> Result<Self, CliError> {
        let d = RunConfig::default();
        let dimension = flags.dim.or(file.dim).unwrap_or(d.dimension);
        if dimension < 3 {
            return Err(CliError::Usage(format!("dimension must be at least 3, got {dimension}")));
        }
        let eta = match flags.eta.or(file.eta) {
            Some(src) => parse_eta(&src)?,
            None => d.eta,
        };
        Ok(Self {
            dimension,
            eta,
            format: flags.format.or(file.format).unwrap_or(d.format),
            trace: flags.trace.or(file.trace).unwrap_or(d.trace),
            out: flags.out.or(file.out),
        })
    }

    pub fn eta_display(&self) -> String {
        format_number(&self.eta)
    }
}

/// Reads a constant such as `1`, `-1`, `i` or `3/5 + 4/5*i` and checks `|η| = 1`.
pub fn parse_eta(src: &str) -> Result<Number, CliError> {
    let value = parse_and_eval(src)?;
    let Value::Polynomial(p) = value else {
        return Err(CliError::Usage(format!("eta `{src}` is not a number")));
    };
    let eta = if p.is_zero() {
        int(0)
    } else {
        match p.as_monomial() {
            Some(m) if m.is_constant() => m.coeff,
            _ => return Err(CliError::Usage(format!("eta `{src}` is not a number"))),
        }
    };
    if !is_unit_modulus(&eta) {
        return Err(CliError::Usage(format!("eta must have modulus 1, got {}", format_number(&eta))));
    }
    Ok(eta)
}
