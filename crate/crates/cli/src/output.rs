//! CSV and sidecar emission.
//!
//! Every table is fully buffered and written by one writer in row order, so
//! the bytes on disk do not depend on how the rows were computed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;

/// Round-trippable scientific notation (17 significant digits).
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len());
            w.write_record(row)?;
        }
        w.into_inner().context("flushing CSV buffer")
    }
}

/// One emitted file as listed in the sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    pub kind: &'static str,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    artifact: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: String,
    config: &'a ScenarioConfig,
    files: &'a [FileEntry],
}

/// Collects the files of one run and writes the sidecar at the end.
pub struct RunWriter<'a> {
    cfg: &'a ScenarioConfig,
    command: &'static str,
    dir: PathBuf,
    entries: Vec<FileEntry>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub sidecar: PathBuf,
    pub files: Vec<FileEntry>,
}

impl<'a> RunWriter<'a> {
    pub fn new(cfg: &'a ScenarioConfig, command: &'static str) -> Result<Self> {
        let dir = cfg.output.dir.clone();
        fs::create_dir_all(&dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(RunWriter {
            cfg,
            command,
            dir,
            entries: Vec::new(),
        })
    }

    pub fn write(
        &mut self,
        name: String,
        table: &Table,
        kind: &'static str,
        theta: Option<f64>,
        z: Option<f64>,
    ) -> Result<()> {
        let bytes = table.to_bytes()?;
        let path = self.dir.join(&name);
        write_file(&path, &bytes)?;
        self.entries.push(FileEntry {
            file: name,
            rows: table.rows.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            theta,
            z,
            kind,
        });
        Ok(())
    }

    pub fn finish(self) -> Result<RunReport> {
        let sidecar = Sidecar {
            artifact: "tripod-vortex",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config_hash: self.cfg.hash(),
            config: self.cfg,
            files: &self.entries,
        };
        let mut text = serde_json::to_string_pretty(&sidecar)?;
        text.push('\n');
        let path = self.dir.join(format!(
            "{}_{}.json",
            self.cfg.prefix(),
            self.command.replace('-', "_")
        ));
        write_file(&path, text.as_bytes())?;
        Ok(RunReport {
            dir: self.dir,
            sidecar: path,
            files: self.entries,
        })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0, -0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn table_bytes() {
        let mut t = Table::new(&["a", "b"]);
        t.rows.push(vec![num(0.5), flag(true)]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "a,b\n5.0000000000000000e-1,true\n");
    }
}
