//! Distortion spec files, batch generation and the output manifest.
//!
//! A spec file holds one distortion per line; `#` starts a comment:
//!
//! ```text
//! downsample 7
//! gaussian 2 16        # geometry sigma, color sigma, job seed
//! gaussian 4 32 1234   # explicit seed
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use pcqa_core::bench::Stimulus;
use pcqa_core::cloud::PointCloud;
use pcqa_core::distort::DistortionSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::sha256_hex;
use crate::error::{io_error, Error, Result};
use crate::ply::{to_ply_bytes, PlyFormat};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Parses a spec file. Gaussian lines without a seed use `default_seed`.
pub fn parse_spec(text: &str, path: &Path, default_seed: u64) -> Result<Vec<DistortionSpec>> {
    let mut specs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let number = |t: &str, what: &str| -> Result<f64> {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("invalid {what} '{t}'")))
        };
        let spec = match tokens.as_slice() {
            ["downsample", level] => DistortionSpec::Downsample {
                level: level
                    .parse()
                    .map_err(|_| err(format!("invalid octree level '{level}'")))?,
            },
            ["gaussian", geo, col, rest @ ..] if rest.len() <= 1 => DistortionSpec::Gaussian {
                sigma_geometry: number(geo, "geometry sigma")?,
                sigma_color: number(col, "color sigma")?,
                seed: match rest {
                    [s] => s.parse().map_err(|_| err(format!("invalid seed '{s}'")))?,
                    _ => default_seed,
                },
            },
            [kind, ..] if *kind == "downsample" || *kind == "gaussian" => {
                return Err(err(format!("wrong number of arguments for '{kind}'")));
            }
            [kind, ..] => return Err(err(format!("unknown distortion '{kind}'"))),
            [] => unreachable!(),
        };
        spec.validate().map_err(|e| err(e.to_string()))?;
        specs.push(spec);
    }
    Ok(specs)
}

pub fn read_spec(path: &Path, default_seed: u64) -> Result<Vec<DistortionSpec>> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    parse_spec(&text, path, default_seed)
}

/// Distortion type label used for benchmark subsets.
pub fn distortion_type(spec: &DistortionSpec) -> &'static str {
    match spec {
        DistortionSpec::Downsample { .. } => "downsampling",
        DistortionSpec::Gaussian { .. } => "gaussian_noise",
    }
}

/// One generated (or externally produced) stimulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: PathBuf,
    /// Source cloud file the stimulus was derived from.
    pub source: PathBuf,
    pub content: String,
    /// Subset label: `downsampling`, `gaussian_noise`, or for codec output
    /// written by other tools e.g. `gpcc_trisoup`, `vpcc`, `gpcc_octree`.
    pub distortion: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<DistortionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

impl ManifestEntry {
    pub fn stimulus(&self) -> Stimulus {
        Stimulus {
            id: self.id.clone(),
            content: self.content.clone(),
            distortion: self.distortion.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_error(path))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        fs::write(path, text).map_err(io_error(path))
    }
}

/// Applies every spec to `cloud` (read from `source`), writes
/// `<cloud>_<label>.ply` files into `out_dir` and returns their manifest
/// entries in spec order. Nothing is written for an empty spec list.
pub fn generate(
    cloud: &PointCloud,
    source: &Path,
    specs: &[DistortionSpec],
    out_dir: &Path,
    format: PlyFormat,
) -> Result<Manifest> {
    if specs.is_empty() {
        return Ok(Manifest::default());
    }
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
    let entries = specs
        .par_iter()
        .map(|spec| {
            let out = spec.apply(cloud)?;
            let bytes = to_ply_bytes(&out, format);
            let file = out_dir.join(format!("{}.ply", out.name));
            fs::write(&file, &bytes).map_err(io_error(&file))?;
            Ok(ManifestEntry {
                id: out.name.clone(),
                file,
                source: source.to_path_buf(),
                content: cloud.name.clone(),
                distortion: distortion_type(spec).to_string(),
                spec: Some(spec.clone()),
                seed: match spec {
                    DistortionSpec::Gaussian { seed, .. } => Some(*seed),
                    DistortionSpec::Downsample { .. } => None,
                },
                points: Some(out.len()),
                sha256: Some(sha256_hex(&bytes)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = entries.iter().find(|e| !seen.insert(e.id.clone())) {
        return Err(Error::Invalid(format!(
            "two specs produce the same output '{}'",
            dup.id
        )));
    }
    Ok(Manifest { entries })
}
