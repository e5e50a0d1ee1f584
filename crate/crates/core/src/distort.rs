//! Distortion generators: octree downsampling and Gaussian geometry/color
//! noise.
//!
//! Noise is drawn from ChaCha8 seeded with `seed_from_u64(seed)`, standard
//! normals by the ziggurat sampler of `rand_distr`. Per point the draws are
//! x, y, z offsets followed by r, g, b offsets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::{dedup_first, Point, PointCloud};
use crate::{round_half_away, Error, Result};

pub const MAX_OCTREE_LEVEL: u32 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistortionSpec {
    Downsample {
        level: u32,
    },
    Gaussian {
        sigma_geometry: f64,
        sigma_color: f64,
        seed: u64,
    },
}

impl DistortionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistortionSpec::Downsample { level } => {
                if !(1..=MAX_OCTREE_LEVEL).contains(&level) {
                    return Err(Error::OctreeLevelOutOfRange(level));
                }
            }
            DistortionSpec::Gaussian {
                sigma_geometry,
                sigma_color,
                ..
            } => {
                if !(sigma_geometry >= 0.0
                    && sigma_geometry.is_finite()
                    && sigma_color >= 0.0
                    && sigma_color.is_finite())
                {
                    return Err(Error::InvalidParameter(format!(
                        "noise standard deviations must be finite and non-negative, got {sigma_geometry} / {sigma_color}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Short label such as `ds7` or `gn_g2_c16_s42`, used in file names.
    pub fn label(&self) -> String {
        match *self {
            DistortionSpec::Downsample { level } => format!("ds{level}"),
            DistortionSpec::Gaussian {
                sigma_geometry,
                sigma_color,
                seed,
            } => {
                format!("gn_g{sigma_geometry}_c{sigma_color}_s{seed}")
            }
        }
    }

    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud> {
        self.validate()?;
        let mut out = match *self {
            DistortionSpec::Downsample { level } => octree_downsample(cloud, level)?,
            DistortionSpec::Gaussian {
                sigma_geometry,
                sigma_color,
                seed,
            } => gaussian_noise(cloud, sigma_geometry, sigma_color, seed)?,
        };
        out.name = format!("{}_{}", cloud.name, self.label());
        Ok(out)
    }
}

/// Octree cell of every point: the bounding cube (min corner, side equal
/// to the longest extent) split into `2^level` intervals per axis.
pub fn octree_cells(cloud: &PointCloud, level: u32) -> Result<Vec<[u32; 3]>> {
    if !(1..=MAX_OCTREE_LEVEL).contains(&level) {
        return Err(Error::OctreeLevelOutOfRange(level));
    }
    cloud.ensure_nonempty()?;
    let mut min = [i32::MAX; 3];
    let mut max = [i32::MIN; 3];
    for p in &cloud.points {
        for a in 0..3 {
            min[a] = min[a].min(p.position[a]);
            max[a] = max[a].max(p.position[a]);
        }
    }
    let side = (0..3).map(|a| i64::from(max[a]) - i64::from(min[a])).max().unwrap_or(0);
    let cells = 1i64 << level;
    Ok(cloud
        .points
        .iter()
        .map(|p| {
            let mut c = [0u32; 3];
            for a in 0..3 {
                let offset = i64::from(p.position[a]) - i64::from(min[a]);
                c[a] = if side == 0 {
                    0
                } else {
                    ((offset * cells) / side).min(cells - 1) as u32
                };
            }
            c
        })
        .collect())
}

/// Merges all points of an octree cell into one point at the rounded
/// centroid carrying the rounded mean color. Output keeps the order in
/// which cells are first encountered.
pub fn octree_downsample(cloud: &PointCloud, level: u32) -> Result<PointCloud> {
    let cells = octree_cells(cloud, level)?;
    #[derive(Default)]
    struct Acc {
        first: usize,
        count: u64,
        pos: [i64; 3],
        color: [u64; 3],
    }
    let mut groups: BTreeMap<[u32; 3], Acc> = BTreeMap::new();
    for (i, (p, cell)) in cloud.points.iter().zip(&cells).enumerate() {
        let acc = groups.entry(*cell).or_insert_with(|| Acc {
            first: i,
            ..Default::default()
        });
        acc.count += 1;
        for a in 0..3 {
            acc.pos[a] += i64::from(p.position[a]);
            acc.color[a] += u64::from(p.color[a]);
        }
    }
    let mut merged: Vec<(usize, Point)> = groups
        .into_values()
        .map(|acc| {
            let n = acc.count as f64;
            let position = acc.pos.map(|s| round_half_away(s as f64 / n) as i32);
            let color = acc.color.map(|s| round_half_away(s as f64 / n).min(255.0) as u8);
            (acc.first, Point::new(position, color))
        })
        .collect();
    merged.sort_by_key(|(first, _)| *first);
    // distinct cells can round to one position only when cells are narrower
    // than a grid step
    let points = dedup_first(merged.into_iter().map(|(_, p)| p).collect());
    Ok(PointCloud::new(cloud.name.clone(), points))
}

/// Adds i.i.d. zero-mean Gaussian noise to every coordinate and color
/// channel, rounds to integers, clamps colors to `[0, 255]` and removes
/// points that land on an occupied position (first occurrence kept).
pub fn gaussian_noise(cloud: &PointCloud, sigma_geometry: f64, sigma_color: f64, seed: u64) -> Result<PointCloud> {
    DistortionSpec::Gaussian {
        sigma_geometry,
        sigma_color,
        seed,
    }
    .validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |sigma: f64| -> f64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        sigma * z
    };
    let noisy = cloud
        .points
        .iter()
        .map(|p| {
            let mut position = [0i32; 3];
            for a in 0..3 {
                position[a] = round_half_away(f64::from(p.position[a]) + draw(sigma_geometry)) as i32;
            }
            let mut color = [0u8; 3];
            for a in 0..3 {
                color[a] = round_half_away(f64::from(p.color[a]) + draw(sigma_color)).clamp(0.0, 255.0) as u8;
            }
            Point::new(position, color)
        })
        .collect();
    Ok(PointCloud::new(cloud.name.clone(), dedup_first(noisy)))
}
