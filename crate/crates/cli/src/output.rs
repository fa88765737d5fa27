//! Result files. Every file carries the tool version and the config hash.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Sink {
    dir: PathBuf,
    hash: String,
    config: Value,
}

impl Sink {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        std::fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
        Ok(Self { dir: config.out.clone(), hash: config.hash(), config: serde_json::to_value(config)? })
    }

    /// Pretty JSON object holding `payload` under `key`, next to the provenance.
    pub fn json<T: Serialize>(&self, name: &str, key: &str, payload: &T) -> Result<PathBuf> {
        let doc = json!({
            "tool": "ek-lab",
            "version": VERSION,
            "config_hash": self.hash,
            "config": self.config,
            key: payload,
        });
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        w.flush()?;
        Ok(path)
    }

    /// CSV with a leading `#` provenance line, then a header row.
    pub fn csv(&self, name: &str, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut file = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(file, "# ek-lab {VERSION} config_hash={}", self.hash)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(path)
    }
}
