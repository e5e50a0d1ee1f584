//! Point-based baselines: geometry PSNR from point-to-point and
//! point-to-plane errors, and luma PSNR over nearest-neighbour pairs.
//!
//! Every error is evaluated in both directions (distorted against reference
//! and reference against distorted) and the larger is kept.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{MetricId, MetricScore};
use crate::cloud::{bounding_stats, NeighborIndex, PointCloud};
use crate::iqa2d::{cap_psnr, luma, psnr_from_mse};
use crate::linalg::symmetric_eigen3;
use crate::{Error, Result};

pub const DEFAULT_NORMAL_NEIGHBORS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Mse,
    Hausdorff,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PointMetricConfig {
    /// Geometry PSNR peak; defaults to the reference bounding diagonal.
    pub peak: Option<f64>,
    pub normal_neighbors: usize,
}

impl Default for PointMetricConfig {
    fn default() -> Self {
        Self {
            peak: None,
            normal_neighbors: DEFAULT_NORMAL_NEIGHBORS,
        }
    }
}

fn aggregate(errors: impl Iterator<Item = f64>, mode: Aggregation) -> f64 {
    match mode {
        Aggregation::Mse => {
            let (sum, n) = errors.fold((0.0, 0usize), |(s, n), e| (s + e, n + 1));
            sum / n as f64
        }
        Aggregation::Hausdorff => errors.fold(0.0, f64::max),
    }
}

fn directional_p2po(from: &PointCloud, to: &NeighborIndex, mode: Aggregation) -> f64 {
    aggregate(from.positions().map(|p| to.nearest(p).dist2), mode)
}

/// Symmetric point-to-point squared error.
pub fn p2po_error(reference: &PointCloud, distorted: &PointCloud, mode: Aggregation) -> Result<f64> {
    let ref_index = NeighborIndex::build(reference)?;
    let dis_index = NeighborIndex::build(distorted)?;
    Ok(directional_p2po(distorted, &ref_index, mode).max(directional_p2po(reference, &dis_index, mode)))
}

fn geometry_peak(reference: &PointCloud, cfg: &PointMetricConfig) -> Result<f64> {
    let peak = match cfg.peak {
        Some(p) => p,
        None => bounding_stats(reference)?.diagonal,
    };
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::DegenerateCloud("geometry PSNR peak must be positive"));
    }
    Ok(peak)
}

pub fn psnr_p2po(
    reference: &PointCloud,
    distorted: &PointCloud,
    mode: Aggregation,
    cfg: &PointMetricConfig,
) -> Result<MetricScore> {
    let error = p2po_error(reference, distorted, mode)?;
    let peak = geometry_peak(reference, cfg)?;
    let id = match mode {
        Aggregation::Mse => MetricId::P2poMse,
        Aggregation::Hausdorff => MetricId::P2poHausdorff,
    };
    Ok(MetricScore::scalar(
        id,
        cap_psnr(psnr_from_mse(error, peak)),
        Some(peak),
    ))
}

/// Per-point unit normals.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalSet {
    pub normals: Vec<[f64; 3]>,
    /// Points whose neighbourhood had zero spread and got the `+z` fallback.
    pub degenerate: Vec<usize>,
}

/// Normal of each point as the least-variance direction of its `k` nearest
/// neighbours (the point itself included), oriented away from the centroid.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<NormalSet> {
    let n = cloud.len();
    if k < 3 || n <= k {
        return Err(Error::TooFewPointsForNormals { k, n });
    }
    let index = NeighborIndex::build(cloud)?;
    let centroid = bounding_stats(cloud)?.center;
    let mut normals = Vec::with_capacity(n);
    let mut degenerate = Vec::new();
    for (i, p) in cloud.positions().enumerate() {
        let hood = index.k_nearest(p, k);
        let mut mean = [0.0; 3];
        for nb in &hood {
            let q = index.position(nb.index);
            for a in 0..3 {
                mean[a] += q[a];
            }
        }
        let m = hood.len() as f64;
        mean.iter_mut().for_each(|v| *v /= m);
        let mut cov = [[0.0; 3]; 3];
        for nb in &hood {
            let q = index.position(nb.index);
            let d = [q[0] - mean[0], q[1] - mean[1], q[2] - mean[2]];
            for r in 0..3 {
                for c in 0..3 {
                    cov[r][c] += d[r] * d[c] / m;
                }
            }
        }
        if cov[0][0] + cov[1][1] + cov[2][2] <= 0.0 {
            degenerate.push(i);
            normals.push([0.0, 0.0, 1.0]);
            continue;
        }
        let (_, vectors) = symmetric_eigen3(cov);
        let mut normal = vectors[0];
        let len = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
        normal.iter_mut().for_each(|v| *v /= len);
        let outward =
            (p[0] - centroid[0]) * normal[0] + (p[1] - centroid[1]) * normal[1] + (p[2] - centroid[2]) * normal[2];
        if outward < 0.0 {
            normal.iter_mut().for_each(|v| *v = -*v);
        }
        normals.push(normal);
    }
    Ok(NormalSet { normals, degenerate })
}

fn directional_p2pl(from: &PointCloud, to: &NeighborIndex, to_normals: &NormalSet, mode: Aggregation) -> f64 {
    aggregate(
        from.positions().map(|p| {
            let nb = to.nearest(p);
            let q = to.position(nb.index);
            let n = to_normals.normals[nb.index];
            let proj = (p[0] - q[0]) * n[0] + (p[1] - q[1]) * n[1] + (p[2] - q[2]) * n[2];
            proj * proj
        }),
        mode,
    )
}

/// Symmetric point-to-plane squared error; each direction projects the
/// displacement onto the normal of the matched point in the target cloud.
pub fn p2pl_error(
    reference: &PointCloud,
    reference_normals: &NormalSet,
    distorted: &PointCloud,
    distorted_normals: &NormalSet,
    mode: Aggregation,
) -> Result<f64> {
    if reference_normals.normals.len() != reference.len() || distorted_normals.normals.len() != distorted.len() {
        return Err(Error::InvalidParameter("normal set does not match its cloud".into()));
    }
    let ref_index = NeighborIndex::build(reference)?;
    let dis_index = NeighborIndex::build(distorted)?;
    Ok(
        directional_p2pl(distorted, &ref_index, reference_normals, mode).max(directional_p2pl(
            reference,
            &dis_index,
            distorted_normals,
            mode,
        )),
    )
}

pub fn psnr_p2pl(
    reference: &PointCloud,
    distorted: &PointCloud,
    mode: Aggregation,
    cfg: &PointMetricConfig,
) -> Result<MetricScore> {
    reference.ensure_nonempty()?;
    distorted.ensure_nonempty()?;
    let rn = estimate_normals(reference, cfg.normal_neighbors)?;
    let dn = estimate_normals(distorted, cfg.normal_neighbors)?;
    let error = p2pl_error(reference, &rn, distorted, &dn, mode)?;
    let peak = geometry_peak(reference, cfg)?;
    let id = match mode {
        Aggregation::Mse => MetricId::P2plMse,
        Aggregation::Hausdorff => MetricId::P2plHausdorff,
    };
    Ok(MetricScore::scalar(
        id,
        cap_psnr(psnr_from_mse(error, peak)),
        Some(peak),
    ))
}

fn directional_luma(from: &PointCloud, to_cloud: &PointCloud, to: &NeighborIndex) -> f64 {
    aggregate(
        from.points.iter().map(|p| {
            let nb = to.nearest(p.position_f64());
            let d = luma(p.color) - luma(to_cloud.points[nb.index].color);
            d * d
        }),
        Aggregation::Mse,
    )
}

/// Symmetric luma mean squared error over nearest-neighbour pairs.
pub fn psnr_y_error(reference: &PointCloud, distorted: &PointCloud) -> Result<f64> {
    let ref_index = NeighborIndex::build(reference)?;
    let dis_index = NeighborIndex::build(distorted)?;
    Ok(directional_luma(distorted, reference, &ref_index).max(directional_luma(reference, distorted, &dis_index)))
}

pub fn psnr_y(reference: &PointCloud, distorted: &PointCloud) -> Result<MetricScore> {
    let mse = psnr_y_error(reference, distorted)?;
    Ok(MetricScore::scalar(
        MetricId::PsnrY,
        cap_psnr(psnr_from_mse(mse, 255.0)),
        None,
    ))
}
