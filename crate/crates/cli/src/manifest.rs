//! Run manifests written next to every output file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tdbie::marching::Materials;
use tdbie::ssm::ScanConfig;

use crate::CliError;

/// Everything needed to repeat a run; `argv` is replayed verbatim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub formulation: Option<String>,
    pub shape: Option<String>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub materials: Option<Materials>,
    pub wave: Option<String>,
    pub t0: Option<f64>,
    pub alpha: Option<f64>,
    pub ssm: Option<ScanConfig>,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// `marching`, `reference`, ... for history outputs
    pub source: Option<String>,
    /// data file this manifest describes, relative to the manifest
    pub output: String,
    pub argv: Vec<String>,
    /// subcommand-specific summary (verdicts, metrics)
    pub outcome: serde_json::Value,
}

impl RunManifest {
    pub fn new(subcommand: &str, output: &str, argv: &[String]) -> Self {
        RunManifest {
            subcommand: subcommand.into(),
            formulation: None,
            shape: None,
            n: None,
            dt: None,
            steps: None,
            materials: None,
            wave: None,
            t0: None,
            alpha: None,
            ssm: None,
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            source: None,
            output: output.into(),
            argv: argv.to_vec(),
            outcome: serde_json::Value::Null,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}
