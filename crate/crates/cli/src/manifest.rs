//! Run manifest: what was invoked, with which inputs and settings, and what
//! it produces.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use pursuit_core::ControllerConfig;
use pursuit_sim::SimConfig;
use sha2::{Digest, Sha256};

pub const FILE_NAME: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub version: &'static str,
    pub inputs: Vec<InputDigest>,
    /// Paths relative to the output directory, the manifest itself first.
    pub outputs: Vec<String>,
    /// Resolved settings per run, keyed by a run label.
    pub runs: Vec<(String, ControllerConfig<f64>, SimConfig)>,
    /// Generator parameters, for `generate`.
    pub params: Option<toml::Table>,
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            inputs: Vec::new(),
            outputs: vec![FILE_NAME.to_string()],
            runs: Vec::new(),
            params: None,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| path.display().to_string())?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn add_output(&mut self, relative: impl Into<String>) {
        self.outputs.push(relative.into());
    }

    pub fn add_run(&mut self, label: impl Into<String>, config: &ControllerConfig<f64>, sim: &SimConfig) {
        self.runs.push((label.into(), config.clone(), *sim));
    }

    pub fn to_text(&self) -> String {
        let mut doc = toml::Table::new();
        doc.insert("toolkit".into(), "pursuit-lab".into());
        doc.insert("version".into(), self.version.into());
        doc.insert("command".into(), strings(&self.command));
        doc.insert("outputs".into(), strings(&self.outputs));
        let inputs = self
            .inputs
            .iter()
            .map(|i| {
                let mut t = toml::Table::new();
                t.insert("path".into(), i.path.clone().into());
                t.insert("sha256".into(), i.sha256.clone().into());
                toml::Value::Table(t)
            })
            .collect();
        doc.insert("inputs".into(), toml::Value::Array(inputs));
        if !self.runs.is_empty() {
            let mut runs = toml::Table::new();
            for (label, config, sim) in &self.runs {
                let mut run = toml::Table::new();
                run.insert(
                    "controller".into(),
                    toml::Value::try_from(config).expect("config serializes"),
                );
                run.insert("sim".into(), toml::Value::try_from(sim).expect("sim config serializes"));
                runs.insert(label.clone(), toml::Value::Table(run));
            }
            doc.insert("runs".into(), toml::Value::Table(runs));
        }
        if let Some(params) = &self.params {
            doc.insert("params".into(), toml::Value::Table(params.clone()));
        }
        toml::to_string(&doc).expect("manifest serializes")
    }

    /// Writes the manifest into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
        let file = dir.join(FILE_NAME);
        fs::write(&file, self.to_text()).with_context(|| file.display().to_string())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn strings(items: &[String]) -> toml::Value {
    toml::Value::Array(items.iter().map(|s| s.clone().into()).collect())
}
