//! Projection-based metrics: render both clouds from every icosphere view,
//! score each snapshot pair with a 2D kernel on luma, and average.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{MetricId, MetricScore};
use crate::cloud::PointCloud;
use crate::iqa2d::{cap_psnr, iw_ssim, ms_ssim, psnr, ssim, to_luma, IwSsimParams, LumaImage};
use crate::project::{ProjectedImage, ProjectionConfig, Projector};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    Psnr,
    Ssim,
    MsSsim,
    IwSsim,
}

impl ProjectionKind {
    pub fn metric_id(&self) -> MetricId {
        match self {
            ProjectionKind::Psnr => MetricId::PsnrP,
            ProjectionKind::Ssim => MetricId::SsimP,
            ProjectionKind::MsSsim => MetricId::MsssimP,
            ProjectionKind::IwSsim => MetricId::IwssimP,
        }
    }
}

/// Smallest canvas side the kernel can evaluate.
pub fn min_canvas_side(kind: ProjectionKind, params: &IwSsimParams) -> usize {
    match kind {
        ProjectionKind::Psnr => 1,
        ProjectionKind::Ssim => params.window_size,
        ProjectionKind::MsSsim | ProjectionKind::IwSsim => params.window_size << params.scales.saturating_sub(1),
    }
}

fn luma_of(img: &ProjectedImage) -> LumaImage {
    to_luma(img.width, img.height, &img.pixels)
}

/// Score of one snapshot pair. PSNR is capped so view averages stay finite.
pub fn view_score(
    kind: ProjectionKind,
    reference: &ProjectedImage,
    distorted: &ProjectedImage,
    params: &IwSsimParams,
) -> Result<f64> {
    let (x, y) = (luma_of(reference), luma_of(distorted));
    match kind {
        ProjectionKind::Psnr => psnr(&x, &y, params.dynamic_range).map(cap_psnr),
        ProjectionKind::Ssim => ssim(&x, &y, params).map(|m| m.mean),
        ProjectionKind::MsSsim => ms_ssim(&x, &y, params),
        ProjectionKind::IwSsim => iw_ssim(&x, &y, params),
    }
}

/// Mean over all viewpoints of a 2D kernel applied to the snapshot pairs.
pub fn projection_metric(
    kind: ProjectionKind,
    reference: &PointCloud,
    distorted: &PointCloud,
    cfg: &ProjectionConfig,
    params: &IwSsimParams,
) -> Result<MetricScore> {
    params.validate()?;
    let projector = Projector::for_pair(reference, distorted, cfg, min_canvas_side(kind, params))?;
    let views = cfg.viewpoints()?;
    let per_view = views
        .viewpoints
        .iter()
        .map(|v| {
            let r = projector.project(reference, v)?;
            let d = projector.project(distorted, v)?;
            view_score(kind, &r, &d, params)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MetricScore::from_views(kind.metric_id(), per_view))
}

/// IW-SSIM_p: information-content weighted SSIM averaged over the views.
pub fn iw_ssim_p(
    reference: &PointCloud,
    distorted: &PointCloud,
    cfg: &ProjectionConfig,
    params: &IwSsimParams,
) -> Result<MetricScore> {
    projection_metric(ProjectionKind::IwSsim, reference, distorted, cfg, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Point;
    use crate::iqa2d::PSNR_CAP;

    fn shell(radius: i32) -> PointCloud {
        let mut pts = Vec::new();
        let r2 = (radius * radius) as f64;
        for x in -radius..=radius {
            for y in -radius..=radius {
                for z in -radius..=radius {
                    let d = ((x * x + y * y + z * z) as f64 - r2).abs();
                    if d <= radius as f64 {
                        let c = [
                            (128 + x * 5) as u8,
                            (128 + y * 3) as u8,
                            ((x * y).rem_euclid(200)) as u8,
                        ];
                        pts.push(Point::new([x, y, z], c));
                    }
                }
            }
        }
        PointCloud::new("shell", pts)
    }

    #[test]
    fn identical_clouds_hit_the_maximum_in_every_view() {
        let c = shell(20);
        let cfg = ProjectionConfig::default();
        let p = IwSsimParams::default();
        for kind in [
            ProjectionKind::Psnr,
            ProjectionKind::Ssim,
            ProjectionKind::MsSsim,
            ProjectionKind::IwSsim,
        ] {
            let s = projection_metric(kind, &c, &c, &cfg, &p).unwrap();
            assert_eq!(s.per_view.len(), 12);
            let best = if kind == ProjectionKind::Psnr { PSNR_CAP } else { 1.0 };
            assert!(
                s.per_view.iter().all(|v| (v - best).abs() < 1e-9),
                "{kind:?} {:?}",
                s.per_view
            );
            let mean = s.per_view.iter().sum::<f64>() / 12.0;
            assert!((s.value - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn small_clouds_get_a_canvas_large_enough_for_five_scales() {
        let c = shell(10);
        let s = iw_ssim_p(&c, &c, &ProjectionConfig::default(), &IwSsimParams::default()).unwrap();
        assert!((s.value - 1.0).abs() < 1e-9);
        assert_eq!(min_canvas_side(ProjectionKind::IwSsim, &IwSsimParams::default()), 176);
    }

    #[test]
    fn color_noise_lowers_every_projection_metric() {
        let c = shell(20);
        let mut d = c.clone();
        for (i, p) in d.points.iter_mut().enumerate() {
            if i % 3 == 0 {
                p.color = p.color.map(|v| v.saturating_add(40));
            }
        }
        let cfg = ProjectionConfig::default();
        let p = IwSsimParams::default();
        for kind in [ProjectionKind::Ssim, ProjectionKind::MsSsim, ProjectionKind::IwSsim] {
            let s = projection_metric(kind, &c, &d, &cfg, &p).unwrap();
            assert!(s.value < 1.0 && s.value > 0.0, "{kind:?} {}", s.value);
        }
    }

    #[test]
    fn shuffling_distorted_points_changes_nothing_without_depth_ties() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(99);
        let mut c = PointCloud::new(
            "random",
            (0..3000)
                .map(|_| {
                    Point::new(
                        [
                            rng.random_range(0..400),
                            rng.random_range(0..400),
                            rng.random_range(0..400),
                        ],
                        [rng.random(), rng.random(), rng.random()],
                    )
                })
                .collect(),
        );
        c.remove_duplicate_positions();
        let mut shuffled = c.clone();
        shuffled.points.reverse();
        let cfg = ProjectionConfig::default();
        let projector = Projector::for_pair(&c, &shuffled, &cfg, 176).unwrap();
        // confirm the premise: no pixel has two points sharing the top depth
        for v in &cfg.viewpoints().unwrap().viewpoints {
            let mut top: alloc::collections::BTreeMap<(i64, i64), (f64, usize)> = Default::default();
            for p in &c.points {
                let (x, y, z) = projector.transform(p.position_f64(), v);
                let e = top.entry((x, y)).or_insert((f64::NEG_INFINITY, 0));
                if z > e.0 {
                    *e = (z, 1);
                } else if z == e.0 {
                    e.1 += 1;
                }
            }
            assert!(top.values().all(|&(_, n)| n == 1));
        }
        let p = IwSsimParams::default();
        for kind in [ProjectionKind::Psnr, ProjectionKind::Ssim, ProjectionKind::IwSsim] {
            let a = projection_metric(kind, &c, &c, &cfg, &p).unwrap();
            let b = projection_metric(kind, &c, &shuffled, &cfg, &p).unwrap();
            assert_eq!(a, b);
        }
    }
}
