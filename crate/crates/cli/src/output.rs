//! Atomic artifact writes and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to a temporary file in the target directory, then renames
/// it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let fail = |e: std::io::Error| CliError::io(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Collects everything a run reports about itself in `manifest.json`.
pub struct RunManifest {
    command: String,
    out_dir: PathBuf,
    config: Map<String, Value>,
    inputs: Vec<Value>,
    outputs: Vec<Value>,
    phases: Vec<Value>,
}

impl RunManifest {
    pub fn new(command: &str, out_dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", out_dir.display())))?;
        Ok(Self {
            command: command.to_string(),
            out_dir: out_dir.to_path_buf(),
            config: Map::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            phases: Vec::new(),
        })
    }

    pub fn config(&mut self, key: &str, value: impl Into<Value>) {
        self.config.insert(key.to_string(), value.into());
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(json!({
            "path": path.display().to_string(),
            "bytes": bytes.len(),
            "sha256": sha256_hex(bytes),
        }));
    }

    /// Writes one artifact into the output directory and records it.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        if bytes.is_empty() {
            return Err(CliError::io(format!("refusing to write empty artifact {name}")));
        }
        write_atomic(&self.out_dir.join(name), bytes)?;
        self.outputs.push(json!({
            "file": name,
            "bytes": bytes.len(),
            "sha256": sha256_hex(bytes),
        }));
        Ok(())
    }

    /// Runs `f` and records its wall-clock time under `name`.
    pub fn phase<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.record_phase(name, start);
        out
    }

    pub fn record_phase(&mut self, name: &str, start: Instant) {
        self.phases.push(json!({ "name": name, "seconds": start.elapsed().as_secs_f64() }));
    }

    pub fn finish(self) -> Result<(), CliError> {
        let doc = json!({
            "command": self.command,
            "config": Value::Object(self.config),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "phases": self.phases,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("manifest is valid JSON");
        text.push('\n');
        write_atomic(&self.out_dir.join("manifest.json"), text.as_bytes())
    }
}
