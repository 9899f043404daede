//! Deterministic result emission: every artifact embeds the resolved config
//! and the tool version, and rerunning a config reproduces the bytes.

use anyhow::{Context, Result};
use serde_json::Value;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Emitter {
    out_dir: PathBuf,
}

impl Emitter {
    pub fn new(out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(Emitter { out_dir: out_dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Writes `{ "version", "config", "results" }` as pretty JSON.
    pub fn json(&self, name: &str, config: &Value, results: Value) -> Result<PathBuf> {
        let doc = serde_json::json!({
            "version": VERSION,
            "config": config,
            "results": results,
        });
        let path = self.path(name);
        std::fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Writes CSV rows with a header line.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(path)
    }

    /// Writes one JSON value per line.
    pub fn jsonl(&self, name: &str, lines: &[Value]) -> Result<PathBuf> {
        let path = self.path(name);
        let mut text = String::new();
        for line in lines {
            text.push_str(&serde_json::to_string(line)?);
            text.push('\n');
        }
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
