//! Full-reference point cloud metrics: the projection-based family
//! (PSNR_p, SSIM_p, MS-SSIM_p, IW-SSIM_p) and the point-based baselines
//! (point-to-point, point-to-plane, color PSNR_Y).

mod point;
mod projection;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::iqa2d::IwSsimParams;
use crate::project::ProjectionConfig;
use crate::{Error, Result};

pub use point::{
    estimate_normals, p2pl_error, p2po_error, psnr_p2pl, psnr_p2po, psnr_y, psnr_y_error, Aggregation, NormalSet,
    PointMetricConfig, DEFAULT_NORMAL_NEIGHBORS,
};
pub use projection::{iw_ssim_p, min_canvas_side, projection_metric, view_score, ProjectionKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    P2poMse,
    P2poHausdorff,
    P2plMse,
    P2plHausdorff,
    PsnrY,
    PsnrP,
    SsimP,
    MsssimP,
    IwssimP,
}

impl MetricId {
    pub const ALL: [MetricId; 9] = [
        MetricId::P2poMse,
        MetricId::P2poHausdorff,
        MetricId::P2plMse,
        MetricId::P2plHausdorff,
        MetricId::PsnrY,
        MetricId::PsnrP,
        MetricId::SsimP,
        MetricId::MsssimP,
        MetricId::IwssimP,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricId::P2poMse => "p2po_mse",
            MetricId::P2poHausdorff => "p2po_hausdorff",
            MetricId::P2plMse => "p2pl_mse",
            MetricId::P2plHausdorff => "p2pl_hausdorff",
            MetricId::PsnrY => "psnr_y",
            MetricId::PsnrP => "psnr_p",
            MetricId::SsimP => "ssim_p",
            MetricId::MsssimP => "msssim_p",
            MetricId::IwssimP => "iwssim_p",
        }
    }

    pub fn projection_kind(&self) -> Option<ProjectionKind> {
        match self {
            MetricId::PsnrP => Some(ProjectionKind::Psnr),
            MetricId::SsimP => Some(ProjectionKind::Ssim),
            MetricId::MsssimP => Some(ProjectionKind::MsSsim),
            MetricId::IwssimP => Some(ProjectionKind::IwSsim),
            _ => None,
        }
    }

    pub fn direction(&self) -> Direction {
        Direction::HigherBetter
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    /// Accepts the canonical ids with or without separators, so `iwssimp`,
    /// `iwssim_p` and `IW-SSIM_p` all parse.
    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        let key = match key.as_str() {
            "p2pom" | "p2pomse" | "psnrp2pomse" | "psnrp2pom" => "p2pomse",
            "p2poh" | "p2pohausdorff" | "psnrp2pohausdorff" | "psnrp2poh" => "p2pohausdorff",
            "p2plm" | "p2plmse" | "psnrp2plmse" | "psnrp2plm" => "p2plmse",
            "p2plh" | "p2plhausdorff" | "psnrp2plhausdorff" | "psnrp2plh" => "p2plhausdorff",
            other => other,
        };
        MetricId::ALL
            .iter()
            .copied()
            .find(|m| m.as_str().replace('_', "") == key)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown metric '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric: MetricId,
    pub value: f64,
    /// One entry per viewpoint for projection metrics; empty otherwise.
    pub per_view: Vec<f64>,
    pub direction: Direction,
    /// Peak used for geometry PSNR, when one applies.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub peak: Option<f64>,
}

impl MetricScore {
    pub(crate) fn scalar(metric: MetricId, value: f64, peak: Option<f64>) -> Self {
        Self {
            metric,
            value,
            per_view: Vec::new(),
            direction: metric.direction(),
            peak,
        }
    }

    /// Score whose value is the mean of the per-view values.
    pub fn from_views(metric: MetricId, per_view: Vec<f64>) -> Self {
        let value = per_view.iter().sum::<f64>() / per_view.len() as f64;
        Self {
            metric,
            value,
            per_view,
            direction: metric.direction(),
            peak: None,
        }
    }
}

/// Settings for every metric family.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub projection: ProjectionConfig,
    pub iwssim: IwSsimParams,
    pub point: PointMetricConfig,
}

/// Scores `distorted` against `reference` with one metric.
pub fn score(
    metric: MetricId,
    reference: &PointCloud,
    distorted: &PointCloud,
    cfg: &MetricConfig,
) -> Result<MetricScore> {
    match metric {
        MetricId::P2poMse => psnr_p2po(reference, distorted, Aggregation::Mse, &cfg.point),
        MetricId::P2poHausdorff => psnr_p2po(reference, distorted, Aggregation::Hausdorff, &cfg.point),
        MetricId::P2plMse => psnr_p2pl(reference, distorted, Aggregation::Mse, &cfg.point),
        MetricId::P2plHausdorff => psnr_p2pl(reference, distorted, Aggregation::Hausdorff, &cfg.point),
        MetricId::PsnrY => psnr_y(reference, distorted),
        MetricId::PsnrP | MetricId::SsimP | MetricId::MsssimP | MetricId::IwssimP => {
            let kind = metric
                .projection_kind()
                .ok_or(Error::InvalidParameter(alloc::format!("{metric}")))?;
            projection_metric(kind, reference, distorted, &cfg.projection, &cfg.iwssim)
        }
    }
}
