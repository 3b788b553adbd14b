//! Output directory with a hashed manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Output {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Output {
    /// The directory itself appears with the first file written.
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::Io(format!("{}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.retain(|(n, _)| n != name);
        self.files.push((name.to_string(), sha256_hex(data)));
        Ok(())
    }

    pub fn text(&mut self, name: &str, data: &str) -> Result<(), CliError> {
        self.bytes(name, data.as_bytes())
    }

    pub fn json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(v).expect("values serialize");
        s.push('\n');
        self.text(name, &s)
    }

    pub fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        self.bytes(name, &buf)
    }

    /// Writes `manifest.json`. Everything except `wall_time_s` is deterministic.
    pub fn finish(mut self, command: &str, config: &Value, config_text: &str, result: &Value, wall: f64) -> Result<(), CliError> {
        self.files.sort();
        let files: Vec<Value> = self.files.iter().map(|(n, h)| json!({"name": n, "sha256": h})).collect();
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "config_sha256": sha256_hex(config_text.as_bytes()),
            "result": result,
            "files": files,
            "wall_time_s": wall,
        });
        let mut s = serde_json::to_string_pretty(&manifest).expect("values serialize");
        s.push('\n');
        fs::create_dir_all(&self.dir).map_err(|e| CliError::Io(format!("{}: {e}", self.dir.display())))?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, s).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}
