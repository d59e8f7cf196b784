//! Artifact writer confined to one output directory.

use std::fs;
use std::io::BufWriter;
use std::path::{Component, Path, PathBuf};

use nlslab::spectral::write_snapshot;
use nlslab::SpectralField;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub kind: String,
}

#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<ArtifactRecord>,
}

/// Accepts plain relative names without parent or root components.
fn check_name(name: &str) -> CliResult<()> {
    let p = Path::new(name);
    let ok = !name.is_empty() && p.components().all(|c| matches!(c, Component::Normal(_)));
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation(format!("artifact name {name:?} escapes the output directory")))
    }
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn artifacts(&self) -> &[ArtifactRecord] {
        &self.written
    }

    fn target(&mut self, name: &str, kind: &str) -> CliResult<PathBuf> {
        check_name(name)?;
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.written.push(ArtifactRecord { path: name.to_string(), kind: kind.to_string() });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let path = self.target(name, "json")?;
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn write_csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> CliResult<()> {
        let path = self.target(name, "csv")?;
        let mut w = csv::Writer::from_path(path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, kind: &str, text: &str) -> CliResult<()> {
        let path = self.target(name, kind)?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn write_field(&mut self, name: &str, field: &SpectralField, t: f64) -> CliResult<()> {
        let path = self.target(name, "nlsf")?;
        let mut w = BufWriter::new(fs::File::create(path)?);
        write_snapshot(&mut w, field, t)?;
        Ok(())
    }
}
