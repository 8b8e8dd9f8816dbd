use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use commutator_lsd::io::{write_atomic, Format};
use commutator_lsd::LsdError;

/// Everything needed to repeat a run: the argv plus the resolved
/// parameters, seeds and versions for reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub seed: u64,
    pub format: Format,
    pub threads: Option<usize>,
    #[serde(default)]
    pub replicate_seeds: Vec<u64>,
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub artifacts: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
}

impl Manifest {
    pub fn new(argv: Vec<String>, seed: u64, format: Format, threads: Option<usize>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: commutator_lsd::VERSION.into(),
            command: String::new(),
            argv,
            params: serde_json::Value::Null,
            seed,
            format,
            threads,
            replicate_seeds: Vec::new(),
            inputs: Vec::new(),
            artifacts: Vec::new(),
            result: None,
        }
    }

    pub fn record<P: Serialize>(&mut self, command: &str, params: &P) {
        self.command = command.into();
        self.params = serde_json::to_value(params).unwrap_or(serde_json::Value::Null);
    }

    pub fn save(&self, dir: &Path) -> Result<(), LsdError> {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("manifest.json"), &serde_json::to_vec_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self, LsdError> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}
