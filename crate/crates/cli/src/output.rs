//! Output files. Every file starts with the same provenance block: CSV files
//! as `# key: value` comment lines, JSON files as a top-level `meta` object.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{RunConfig, Seeds};
use crate::error::CliError;

pub const VERSION: &str = env!("DTC_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seeds: Seeds,
    pub config: RunConfig,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

pub struct Output {
    dir: PathBuf,
    meta: Meta,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn create(dir: &Path, command: &'static str, config: &RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            meta: Meta {
                tool: "dtc",
                version: VERSION,
                command,
                config_sha256: config.hash(),
                seeds: config.seeds,
                config: config.clone(),
            },
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, name: &str, text: String) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `rows` (already comma-joined) under the provenance block and `columns`.
    pub fn csv<I>(&mut self, name: &str, columns: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = String>,
    {
        let m = &self.meta;
        let s = &m.seeds;
        let mut text = format!(
            "# tool: {} {}\n# command: {}\n# scenario: {} sites={}\n# config_sha256: {}\n\
             # seeds: disorder={} initial_state={} trajectories={}\n",
            m.tool, m.version, m.command, m.config.scenario_tag, m.config.sites, m.config_sha256, s.disorder,
            s.initial_state, s.trajectories
        );
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        self.write(name, text)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let doc = Document { meta: &self.meta, body };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.write(name, text)
    }
}

/// Comma-joins numbers in shortest round-trip form.
pub fn row(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v}").expect("write to String");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provenance_block_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::from_json(r#"{"scenario_tag": "loss", "sites": 1}"#)
            .unwrap()
            .resolve()
            .unwrap();
        let mut out = Output::create(dir.path(), "spectrum", &cfg).unwrap();
        out.csv("a.csv", &["x", "y"], [row(&[1.0, -0.5]), row(&[f64::INFINITY, 1e-20])]).unwrap();
        out.json("b.json", &serde_json::json!({"k": 1})).unwrap();
        let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert!(csv.contains(&format!("# config_sha256: {}", cfg.hash())));
        assert!(csv.ends_with("x,y\n1,-0.5\ninf,0.00000000000000000001\n"));
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
        assert_eq!(json["k"], 1);
        assert_eq!(json["meta"]["config_sha256"], cfg.hash());
        assert_eq!(json["meta"]["seeds"]["disorder"], 1);
        assert_eq!(out.written().len(), 2);
    }
}
