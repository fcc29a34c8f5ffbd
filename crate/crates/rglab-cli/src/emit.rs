//! CSV and JSON writers. Floats use the shortest round-trip representation so
//! that identical results give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = concat!("rglab ", env!("CARGO_PKG_VERSION"));

pub fn num(x: f64) -> String {
    if x == 0.0 || (x.abs() >= 1e-4 && x.abs() < 1e15) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// JSON number, or null for non-finite values.
pub fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub struct Output {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let err = |e: csv::Error| CliError::Validation(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(r).map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    /// Summary JSON with provenance header followed by `results`.
    pub fn summary(&mut self, name: &str, command: &str, cfg: &RunConfig, results: Value) -> Result<(), CliError> {
        let doc = json!({
            "command": command,
            "version": VERSION,
            "config": cfg.to_json(),
            "config_hash": cfg.hash(),
            "seed": cfg.seed.unwrap_or(0),
            "results": results,
        });
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(&doc).expect("summary serialises");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }
}
