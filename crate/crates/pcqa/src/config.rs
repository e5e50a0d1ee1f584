//! Job configuration shared by all commands, and the digest embedded in
//! every report.

use std::fs;
use std::path::{Path, PathBuf};

use pcqa_core::bench::BenchConfig;
use pcqa_core::distort::DistortionSpec;
use pcqa_core::metrics::{MetricConfig, MetricId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_error, Error, Result};
use crate::ply::PlyFormat;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JobConfig {
    pub command: Option<String>,
    pub inputs: Vec<PathBuf>,
    pub metrics: Vec<MetricId>,
    pub metric: MetricConfig,
    pub distortions: Vec<DistortionSpec>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub ply_format: PlyFormat,
    pub bench: BenchConfig,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            command: None,
            inputs: Vec::new(),
            metrics: vec![MetricId::IwssimP],
            metric: MetricConfig::default(),
            distortions: Vec::new(),
            seed: 0,
            output: None,
            ply_format: PlyFormat::BinaryLittleEndian,
            bench: BenchConfig::default(),
        }
    }
}

impl JobConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Returns `self` with every field present in the JSON file at `path`
    /// replaced by the file's value. Nested objects merge key by key.
    pub fn overlaid_with_file(&self, path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_error(path))?;
        let json_err = |source| Error::Json {
            path: path.to_path_buf(),
            source,
        };
        let overlay: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
        let mut base = serde_json::to_value(self).expect("configuration serializes");
        merge(&mut base, overlay);
        serde_json::from_value(base).map_err(json_err)
    }
}

fn merge(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// SHA-256 of the compact JSON encoding of `value`, as lowercase hex.
pub fn config_digest<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("configuration serializes");
    sha256_hex(&bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
