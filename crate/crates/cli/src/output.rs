//! CSV tables, atomic file emission and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

/// A CSV cell. Floats use the shortest representation that round-trips.
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::U(v as u64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::S(v.to_string())
    }
}

pub struct Table {
    name: String,
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns, "row width differs from header in {}", self.name);
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            match c {
                Cell::F(v) => write!(self.text, "{v}").unwrap(),
                Cell::U(v) => write!(self.text, "{v}").unwrap(),
                Cell::S(v) => self.text.push_str(&v),
            }
        }
        self.text.push('\n');
    }

    pub fn into_output(self) -> OutputFile {
        OutputFile {
            name: self.name,
            contents: self.text.into_bytes(),
        }
    }
}

pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

impl OutputFile {
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(&self.contents))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub n_steps: usize,
    pub oversample: usize,
    pub eps_ladder: Vec<f64>,
    pub nodes: usize,
    pub omega: f64,
    pub grading: f64,
    pub truncation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub parameters: Config,
    pub master_seed: u64,
    pub discretization: Discretization,
    pub outputs: Vec<OutputRecord>,
    pub wall_time: f64,
}

impl Manifest {
    pub fn new(command: &str, config: &Config, outputs: &[OutputFile], wall_time: f64) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            parameters: config.clone(),
            master_seed: config.seed,
            discretization: Discretization {
                n_steps: config.steps,
                oversample: config.oversample,
                eps_ladder: config.ladder.clone(),
                nodes: config.nodes,
                omega: config.omega,
                grading: config.grading,
                truncation: config.truncation,
            },
            outputs: outputs
                .iter()
                .map(|o| OutputRecord {
                    path: o.name.clone(),
                    sha256: o.digest(),
                })
                .collect(),
            wall_time,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read manifest {}: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Invalid(format!("manifest {}: {e}", path.display())))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::Invalid(format!(
                "manifest schema version {} is not supported (expected {SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        Ok(m)
    }
}

fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, &target).map_err(|e| CliError::Io(format!("{}: {e}", target.display())))?;
    Ok(target)
}

/// Writes every output, then the manifest. Nothing is written if the
/// experiment failed, since outputs are only produced after it finished.
pub fn emit(dir: &Path, command: &str, config: &Config, outputs: &[OutputFile], wall_time: f64) -> Result<Manifest, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for o in outputs {
        write_atomic(dir, &o.name, &o.contents)?;
    }
    let manifest = Manifest::new(command, config, outputs, wall_time);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(dir, MANIFEST_NAME, json.as_bytes())?;
    Ok(manifest)
}
