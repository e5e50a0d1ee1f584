//! Parallel metric evaluation and JSON score records.

use std::path::Path;

use pcqa_core::cloud::PointCloud;
use pcqa_core::iqa2d::{iw_ssim_detailed, to_luma};
use pcqa_core::metrics::{self, min_canvas_side, view_score, MetricConfig, MetricId, MetricScore, ProjectionKind};
use pcqa_core::project::Projector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::config_digest;
use crate::error::Result;
use crate::snapshot::export_iw_maps;

/// One metric value of one (reference, distorted) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    #[serde(rename = "ref")]
    pub reference: String,
    #[serde(rename = "dis")]
    pub distorted: String,
    pub metric: MetricId,
    pub value: f64,
    pub per_view: Vec<f64>,
    pub config_digest: String,
}

/// Scores one pair with every requested metric.
///
/// Projection metrics sharing a canvas reuse the same snapshots; views are
/// rendered and scored in parallel. Results follow the order of `metrics`
/// and equal the sequential [`pcqa_core::metrics::score`].
pub fn score_pair(
    reference: &PointCloud,
    distorted: &PointCloud,
    metrics: &[MetricId],
    cfg: &MetricConfig,
) -> Result<Vec<MetricScore>> {
    score_pair_with_maps(reference, distorted, metrics, cfg, None)
}

/// [`score_pair`], additionally writing IW-SSIM weight and similarity maps
/// of every view to `debug_dir` when given.
pub fn score_pair_with_maps(
    reference: &PointCloud,
    distorted: &PointCloud,
    metrics: &[MetricId],
    cfg: &MetricConfig,
    debug_dir: Option<&Path>,
) -> Result<Vec<MetricScore>> {
    cfg.iwssim.validate()?;
    let views = cfg.projection.viewpoints()?;

    // projection kinds grouped by the canvas they need
    let mut groups: Vec<(Projector, Vec<ProjectionKind>)> = Vec::new();
    for kind in metrics.iter().filter_map(MetricId::projection_kind) {
        let projector = Projector::for_pair(
            reference,
            distorted,
            &cfg.projection,
            min_canvas_side(kind, &cfg.iwssim),
        )?;
        match groups.iter_mut().find(|(p, _)| *p == projector) {
            Some((_, kinds)) => {
                if !kinds.contains(&kind) {
                    kinds.push(kind)
                }
            }
            None => groups.push((projector, vec![kind])),
        }
    }
    let mut projected: Vec<(MetricId, MetricScore)> = Vec::new();
    for (projector, kinds) in &groups {
        let per_view: Vec<Vec<f64>> = views
            .viewpoints
            .par_iter()
            .enumerate()
            .map(|(i, v)| {
                let r = projector.project(reference, v)?;
                let d = projector.project(distorted, v)?;
                if let (Some(dir), true) = (debug_dir, kinds.contains(&ProjectionKind::IwSsim)) {
                    let detail = iw_ssim_detailed(
                        &to_luma(r.width, r.height, &r.pixels),
                        &to_luma(d.width, d.height, &d.pixels),
                        &cfg.iwssim,
                    )?;
                    export_iw_maps(dir, &format!("{}_{i}", distorted.name), &detail)?;
                }
                kinds
                    .iter()
                    .map(|k| view_score(*k, &r, &d, &cfg.iwssim).map_err(Into::into))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        for (k, kind) in kinds.iter().enumerate() {
            let values = per_view.iter().map(|v| v[k]).collect();
            projected.push((kind.metric_id(), MetricScore::from_views(kind.metric_id(), values)));
        }
    }

    let point: Vec<(MetricId, MetricScore)> = metrics
        .par_iter()
        .filter(|m| m.projection_kind().is_none())
        .map(|&m| Ok((m, metrics::score(m, reference, distorted, cfg)?)))
        .collect::<Result<_>>()?;

    Ok(metrics
        .iter()
        .map(|m| {
            projected
                .iter()
                .chain(&point)
                .find(|(id, _)| id == m)
                .map(|(_, s)| s.clone())
                .expect("every requested metric is scored")
        })
        .collect())
}

/// Scores many pairs in parallel and returns records in pair order.
pub fn score_pairs(
    pairs: &[(&PointCloud, &PointCloud)],
    metrics: &[MetricId],
    cfg: &MetricConfig,
    debug_dir: Option<&Path>,
) -> Result<Vec<ScoreRecord>> {
    let digest = config_digest(cfg);
    let nested: Vec<Vec<ScoreRecord>> = pairs
        .par_iter()
        .map(|(r, d)| {
            let scores = score_pair_with_maps(r, d, metrics, cfg, debug_dir)?;
            Ok(scores
                .into_iter()
                .map(|s| ScoreRecord {
                    reference: r.name.clone(),
                    distorted: d.name.clone(),
                    metric: s.metric,
                    value: s.value,
                    per_view: s.per_view,
                    config_digest: digest.clone(),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}
