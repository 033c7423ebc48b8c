use serde::Serialize;
use serde_json::Value as Json;

use crate::config::{OutputFormat, RunConfig};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const ASSUMPTION: &str =
    "point labels are pairwise distinct; all kernels are evaluated at non-coincident points only";

#[derive(Debug, Serialize)]
pub struct Header {
    pub assumption: &'static str,
    pub dimension: u32,
    pub eta: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub header: Header,
    pub result: Json,
}

/// What a subcommand produced: the structured result, its text rendering,
/// an optional DOT rendering and the exit status.
pub struct Outcome {
    pub result: Json,
    pub text: String,
    pub dot: Option<String>,
    pub status: u8,
}

impl Outcome {
    pub fn new(result: impl Serialize, text: String) -> Result<Self, CliError> {
        Ok(Self { result: serde_json::to_value(result)?, text, dot: None, status: 0 })
    }
}

pub fn render(command: &'static str, config: &RunConfig, outcome: &Outcome) -> Result<String, CliError> {
    let header = Header { assumption: ASSUMPTION, dimension: config.dimension, eta: config.eta_display() };
    Ok(match config.format {
        OutputFormat::Json => {
            let report = Report { schema_version: SCHEMA_VERSION, command, header, result: outcome.result.clone() };
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s
        }
        OutputFormat::Text => {
            let mut s = format!(
                "# wickward {command}\n# assumption: {}\n# dimension: {}, eta_C: {}\n",
                header.assumption, header.dimension, header.eta
            );
            s.push_str(&outcome.text);
            if !s.ends_with('\n') {
                s.push('\n');
            }
            s
        }
        OutputFormat::Dot => {
            let Some(dot) = &outcome.dot else {
                return Err(CliError::Usage(format!("`{command}` has no dot output")));
            };
            format!(
                "// wickward {command}\n// assumption: {}\n// dimension: {}, eta_C: {}\n{dot}",
                header.assumption, header.dimension, header.eta
            )
        }
    })
}
