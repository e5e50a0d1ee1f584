//! Point cloud data model, grid normalization and bounding geometry.

mod index;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::{round_half_away, Error, Result};

pub use index::{Neighbor, NeighborIndex};

/// One voxelized point: integer grid position plus 8-bit RGB color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub position: [i32; 3],
    pub color: [u8; 3],
}

impl Point {
    pub const fn new(position: [i32; 3], color: [u8; 3]) -> Self {
        Self { position, color }
    }

    pub fn position_f64(&self) -> [f64; 3] {
        [
            f64::from(self.position[0]),
            f64::from(self.position[1]),
            f64::from(self.position[2]),
        ]
    }
}

/// A point with real-valued coordinates, as read from files that store floats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawPoint {
    pub position: [f64; 3],
    pub color: [u8; 3],
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PointCloud {
    pub name: String,
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> Self {
        Self {
            name: name.into(),
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ensure_nonempty(&self) -> Result<()> {
        if self.points.is_empty() {
            Err(Error::EmptyCloud)
        } else {
            Ok(())
        }
    }

    pub fn positions(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.points.iter().map(Point::position_f64)
    }

    /// Drops points whose position repeats an earlier one. Returns how many
    /// were removed.
    pub fn remove_duplicate_positions(&mut self) -> usize {
        let before = self.points.len();
        self.points = dedup_first(core::mem::take(&mut self.points));
        before - self.points.len()
    }

    pub fn has_unique_positions(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.points.iter().all(|p| seen.insert(p.position))
    }

    /// Returns a copy with every position shifted by `offset`.
    pub fn translated(&self, offset: [i32; 3]) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| {
                Point::new(
                    [
                        p.position[0] + offset[0],
                        p.position[1] + offset[1],
                        p.position[2] + offset[2],
                    ],
                    p.color,
                )
            })
            .collect();
        Self::new(self.name.clone(), points)
    }
}

/// Keeps the first occurrence of each position, preserving input order.
pub(crate) fn dedup_first(points: Vec<Point>) -> Vec<Point> {
    let mut seen = BTreeSet::new();
    points.into_iter().filter(|p| seen.insert(p.position)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingStats {
    pub min: [f64; 3],
    pub max: [f64; 3],
    /// Arithmetic mean of the point positions.
    pub center: [f64; 3],
    /// Euclidean length of `max - min`.
    pub diagonal: f64,
}

pub fn bounding_stats(cloud: &PointCloud) -> Result<BoundingStats> {
    cloud.ensure_nonempty()?;
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    let mut sum = [0.0f64; 3];
    for p in cloud.positions() {
        for axis in 0..3 {
            min[axis] = min[axis].min(p[axis]);
            max[axis] = max[axis].max(p[axis]);
            sum[axis] += p[axis];
        }
    }
    let n = cloud.len() as f64;
    let center = [sum[0] / n, sum[1] / n, sum[2] / n];
    let diagonal = ((max[0] - min[0]).powi(2) + (max[1] - min[1]).powi(2) + (max[2] - min[2]).powi(2)).sqrt();
    Ok(BoundingStats {
        min,
        max,
        center,
        diagonal,
    })
}

/// Maps real-valued points onto the integer grid so that the longest
/// bounding-box axis spans `[0, steps]`, then removes duplicated positions
/// keeping the first occurrence.
pub fn normalize_points(name: &str, points: &[RawPoint], steps: u32) -> Result<PointCloud> {
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("normalization steps must be positive".into()));
    }
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for p in points {
        for axis in 0..3 {
            if !p.position[axis].is_finite() {
                return Err(Error::DegenerateCloud("non-finite coordinate"));
            }
            min[axis] = min[axis].min(p.position[axis]);
            max[axis] = max[axis].max(p.position[axis]);
        }
    }
    let longest = (0..3).map(|a| max[a] - min[a]).fold(0.0, f64::max);
    if longest <= 0.0 {
        return Err(Error::DegenerateCloud("all points coincide, no valid scale"));
    }
    let scale = f64::from(steps) / longest;
    let quantized = points
        .iter()
        .map(|p| {
            let mut g = [0i32; 3];
            for axis in 0..3 {
                g[axis] = round_half_away((p.position[axis] - min[axis]) * scale) as i32;
            }
            Point::new(g, p.color)
        })
        .collect();
    Ok(PointCloud::new(name, dedup_first(quantized)))
}

/// Grid normalization of an already-integer cloud; see [`normalize_points`].
pub fn normalize_to_grid(cloud: &PointCloud, steps: u32) -> Result<PointCloud> {
    let raw: Vec<RawPoint> = cloud
        .points
        .iter()
        .map(|p| RawPoint {
            position: p.position_f64(),
            color: p.color,
        })
        .collect();
    normalize_points(&cloud.name, &raw, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn cloud(points: &[[i32; 3]]) -> PointCloud {
        PointCloud::new("t", points.iter().map(|&g| Point::new(g, [10, 20, 30])).collect())
    }

    #[test]
    fn two_point_span_maps_to_full_grid() {
        let out = normalize_to_grid(&cloud(&[[0, 0, 0], [2, 0, 0]]), 1000).unwrap();
        let pos: Vec<_> = out.points.iter().map(|p| p.position).collect();
        assert_eq!(pos, vec![[0, 0, 0], [1000, 0, 0]]);
    }

    #[test]
    fn normalization_removes_quantized_duplicates() {
        // 0.0001 and 0.0002 both land on grid 0 when the span is 10.
        let raw = [
            RawPoint {
                position: [0.0, 0.0, 0.0],
                color: [1, 1, 1],
            },
            RawPoint {
                position: [0.0001, 0.0, 0.0],
                color: [2, 2, 2],
            },
            RawPoint {
                position: [0.0002, 0.0, 0.0],
                color: [3, 3, 3],
            },
            RawPoint {
                position: [10.0, 5.0, 1.0],
                color: [4, 4, 4],
            },
        ];
        let out = normalize_points("d", &raw, 1000).unwrap();
        assert!(out.len() < raw.len());
        // brute-force uniqueness scan
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                assert_ne!(out.points[i].position, out.points[j].position);
            }
        }
        assert_eq!(out.points[0].color, [1, 1, 1], "first occurrence kept");
        assert_eq!(out.points[1].position, [1000, 500, 100]);
    }

    #[test]
    fn normalization_rejects_degenerate_and_empty() {
        assert_eq!(
            normalize_to_grid(&cloud(&[[3, 3, 3], [3, 3, 3]]), 1000),
            Err(Error::DegenerateCloud("all points coincide, no valid scale"))
        );
        assert_eq!(normalize_to_grid(&cloud(&[]), 1000), Err(Error::EmptyCloud));
    }

    #[test]
    fn bounding_stats_of_symmetric_pair_and_single_point() {
        let s = bounding_stats(&cloud(&[[0, 0, 0], [2, 2, 2]])).unwrap();
        assert_eq!(s.center, [1.0, 1.0, 1.0]);
        assert!((s.diagonal - 2.0 * 3f64.sqrt()).abs() < 1e-12);

        let s = bounding_stats(&cloud(&[[5, -1, 7]])).unwrap();
        assert_eq!(s.center, [5.0, -1.0, 7.0]);
        assert_eq!(s.diagonal, 0.0);
        assert_eq!(bounding_stats(&cloud(&[])), Err(Error::EmptyCloud));
    }

    #[test]
    fn bounding_stats_match_direct_recomputation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let pts: Vec<[i32; 3]> = (0..100)
            .map(|_| {
                [
                    rng.random_range(-500..500),
                    rng.random_range(0..1000),
                    rng.random_range(-3..3),
                ]
            })
            .collect();
        let s = bounding_stats(&cloud(&pts)).unwrap();
        for axis in 0..3 {
            let lo = pts.iter().map(|p| p[axis]).min().unwrap() as f64;
            let hi = pts.iter().map(|p| p[axis]).max().unwrap() as f64;
            let mean = pts.iter().map(|p| p[axis] as f64).sum::<f64>() / 100.0;
            assert_eq!(s.min[axis], lo);
            assert_eq!(s.max[axis], hi);
            assert!((s.center[axis] - mean).abs() < 1e-9);
            assert!(s.min[axis] <= s.center[axis] && s.center[axis] <= s.max[axis]);
        }
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(pts in proptest::collection::vec((-50i32..50, -50i32..50, -50i32..50), 2..60)) {
            let c = cloud(&pts.iter().map(|&(x, y, z)| [x, y, z]).collect::<Vec<_>>());
            prop_assume!(bounding_stats(&c).unwrap().diagonal > 0.0);
            let once = normalize_to_grid(&c, 1000).unwrap();
            let twice = normalize_to_grid(&once, 1000).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.has_unique_positions());
            let s = bounding_stats(&once).unwrap();
            prop_assert_eq!(s.max.iter().cloned().fold(0.0, f64::max), 1000.0);
        }

        #[test]
        fn center_is_translation_equivariant(
            pts in proptest::collection::vec((-1000i32..1000, -1000i32..1000, -1000i32..1000), 1..50),
            v in (-500i32..500, -500i32..500, -500i32..500),
        ) {
            let c = cloud(&pts.iter().map(|&(x, y, z)| [x, y, z]).collect::<Vec<_>>());
            let moved = c.translated([v.0, v.1, v.2]);
            let a = bounding_stats(&c).unwrap().center;
            let b = bounding_stats(&moved).unwrap().center;
            let v = [v.0 as f64, v.1 as f64, v.2 as f64];
            for axis in 0..3 {
                prop_assert!((b[axis] - (a[axis] + v[axis])).abs() < 1e-9);
            }
        }
    }
}
