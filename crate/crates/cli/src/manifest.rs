use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::ArtifactRecord;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub status: String,
    pub exit_code: i32,
    pub error: Option<String>,
    /// Set when the run stopped after writing some artifacts.
    pub partial: bool,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    pub wall_time_seconds: f64,
    pub artifacts: Vec<ArtifactRecord>,
    pub config: RunConfig,
}

pub fn versions() -> BTreeMap<String, String> {
    let mut v = BTreeMap::new();
    v.insert("nlslab-cli".into(), env!("CARGO_PKG_VERSION").into());
    v.insert("nlslab-core".into(), nlslab::VERSION.into());
    v.insert("snapshot-format".into(), "NLSF 1".into());
    v
}

impl Manifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}
