use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub threads: Option<usize>,
    pub command: Command,
    /// Every knob and tolerance with the value actually used.
    pub resolved: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("malformed manifest {}: {e}", path.display())))
    }
}

/// Collects artifacts written into one output directory.
pub struct OutDir {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutDir {
    pub fn create(dir: PathBuf) -> CliResult<Self> {
        fs::create_dir_all(&dir).map_err(|e| CliError::Validation(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(OutDir { dir, artifacts: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
        self.artifacts.push(Artifact { file: name.to_string(), sha256: hex::encode(Sha256::digest(bytes)) });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(format!("cannot serialise {name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let bad = |e: csv::Error| CliError::Numeric(format!("cannot format {name}: {e}"));
        w.write_record(header).map_err(bad)?;
        for row in rows {
            w.write_record(&row).map_err(bad)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Numeric(format!("cannot format {name}: {e}")))?;
        self.write(name, &bytes)
    }

    pub fn finish(self, command: Command, threads: Option<usize>, resolved: serde_json::Value) -> CliResult<Vec<Artifact>> {
        let manifest = Manifest {
            tool: "kamscope".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            threads,
            command,
            resolved,
            artifacts: self.artifacts.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numeric(e.to_string()))? + "\n";
        let path = self.dir.join(MANIFEST);
        fs::write(&path, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
        Ok(self.artifacts)
    }
}

/// Shortest round-trip representation, so tables are exact and stable.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn vector<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}
