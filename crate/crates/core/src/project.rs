//! Orthographic snapshots of a point cloud.
//!
//! Each point is translated by the reference centroid, rotated so the view
//! normal faces +z, scaled, and dropped onto the xy plane. Where several
//! points share a pixel the one with the largest depth wins; untouched
//! pixels keep the background color.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::cloud::{bounding_stats, BoundingStats, PointCloud};
use crate::round_half_away;
use crate::view::{apply_row, viewpoints, Viewpoint, ViewpointSet};
use crate::{Error, Result};

pub const DEFAULT_SCALE: f64 = 0.5;
pub const DEFAULT_BACKGROUND: [u8; 3] = [127, 127, 127];
/// Minimum free pixels kept around the widest possible footprint.
const CANVAS_MARGIN: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Canvas {
    Auto,
    Fixed { width: usize, height: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    pub scale: f64,
    pub canvas: Canvas,
    pub background: [u8; 3],
    /// Icosphere subdivision level of the viewpoint set.
    pub view_level: u32,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            scale: DEFAULT_SCALE,
            canvas: Canvas::Auto,
            background: DEFAULT_BACKGROUND,
            view_level: 0,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        if let Canvas::Fixed { width, height } = self.canvas {
            if width == 0 || height == 0 {
                return Err(Error::InvalidParameter("canvas dimensions must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn viewpoints(&self) -> Result<ViewpointSet> {
        viewpoints(self.view_level)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB, `pixels[y * width + x]`.
    pub pixels: Vec<[u8; 3]>,
    /// Scaled depth of the visible point, `-inf` on background.
    pub depth: Vec<f64>,
    pub occupancy: Vec<bool>,
}

impl ProjectedImage {
    fn blank(width: usize, height: usize, background: [u8; 3]) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            pixels: vec![background; n],
            depth: vec![f64::NEG_INFINITY; n],
            occupancy: vec![false; n],
        }
    }

    pub fn foreground_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }
}

/// Square canvas side derived from the reference bounding diagonal:
/// `ceil(s * diagonal) + 9`, rounded up to even.
pub fn auto_canvas(reference: &BoundingStats, scale: f64) -> Result<(usize, usize)> {
    if !(reference.diagonal > 0.0) {
        return Err(Error::DegenerateCloud("reference bounding diagonal is zero"));
    }
    let side = round_up_even((scale * reference.diagonal).ceil() as usize + 2 * CANVAS_MARGIN + 1);
    Ok((side, side))
}

fn round_up_even(n: usize) -> usize {
    n + (n & 1)
}

/// Everything needed to render any cloud of a reference/distorted pair from
/// any viewpoint onto one shared canvas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projector {
    pub center: [f64; 3],
    pub scale: f64,
    pub background: [u8; 3],
    pub width: usize,
    pub height: usize,
}

impl Projector {
    /// Resolves the canvas for a pair. In auto mode the canvas is the larger of
    /// [`auto_canvas`], a rotation-proof fit of both clouds around the
    /// reference centroid, and `min_side`.
    pub fn for_pair(
        reference: &PointCloud,
        distorted: &PointCloud,
        cfg: &ProjectionConfig,
        min_side: usize,
    ) -> Result<Self> {
        cfg.validate()?;
        reference.ensure_nonempty()?;
        distorted.ensure_nonempty()?;
        let stats = bounding_stats(reference)?;
        let (width, height) = match cfg.canvas {
            Canvas::Fixed { width, height } => (width, height),
            Canvas::Auto => {
                let (side, _) = auto_canvas(&stats, cfg.scale)?;
                let radius = max_radius(reference, &stats.center).max(max_radius(distorted, &stats.center));
                let fit = 2 * ((cfg.scale * radius).ceil() as usize + 1 + CANVAS_MARGIN);
                let side = round_up_even(side.max(fit).max(min_side));
                (side, side)
            }
        };
        Ok(Self {
            center: stats.center,
            scale: cfg.scale,
            background: cfg.background,
            width,
            height,
        })
    }

    /// Projected integer pixel coordinates and depth of one position.
    #[inline]
    pub fn transform(&self, position: [f64; 3], view: &Viewpoint) -> (i64, i64, f64) {
        let t = [
            position[0] - self.center[0],
            position[1] - self.center[1],
            position[2] - self.center[2],
        ];
        let r = apply_row(&t, &view.rotation);
        let s = [self.scale * r[0], self.scale * r[1], self.scale * r[2]];
        (round_half_away(s[0]) as i64, round_half_away(s[1]) as i64, s[2])
    }

    pub fn project(&self, cloud: &PointCloud, view: &Viewpoint) -> Result<ProjectedImage> {
        cloud.ensure_nonempty()?;
        let (half_w, half_h) = ((self.width / 2) as i64, (self.height / 2) as i64);
        let mut img = ProjectedImage::blank(self.width, self.height, self.background);
        let mut extent = Extent::default();
        for p in &cloud.points {
            let (x, y, z) = self.transform(p.position_f64(), view);
            extent.include(x, y);
            let (px, py) = (x + half_w, y + half_h);
            if px < 0 || py < 0 || px >= self.width as i64 || py >= self.height as i64 {
                continue;
            }
            let i = py as usize * self.width + px as usize;
            // strictly greater: on equal depth the earlier point stays
            if !img.occupancy[i] || z > img.depth[i] {
                img.occupancy[i] = true;
                img.depth[i] = z;
                img.pixels[i] = p.color;
            }
        }
        let (required_width, required_height) = extent.required();
        if required_width > self.width || required_height > self.height {
            return Err(Error::CanvasTooSmall {
                width: self.width,
                height: self.height,
                required_width: required_width.max(self.width),
                required_height: required_height.max(self.height),
            });
        }
        Ok(img)
    }
}

#[derive(Default)]
struct Extent {
    min_x: i64,
    max_x: i64,
    min_y: i64,
    max_y: i64,
}

impl Extent {
    fn include(&mut self, x: i64, y: i64) {
        self.min_x = self.min_x.min(x);
        self.max_x = self.max_x.max(x);
        self.min_y = self.min_y.min(y);
        self.max_y = self.max_y.max(y);
    }

    /// Smallest even canvas with a centered origin holding every pixel seen.
    fn required(&self) -> (usize, usize) {
        let side = |lo: i64, hi: i64| 2 * (-lo).max(hi + 1).max(1) as usize;
        (side(self.min_x, self.max_x), side(self.min_y, self.max_y))
    }
}

fn max_radius(cloud: &PointCloud, center: &[f64; 3]) -> f64 {
    cloud
        .positions()
        .map(|p| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) + (p[2] - center[2]).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

/// Projects one cloud with an explicit centroid and canvas.
pub fn project(
    cloud: &PointCloud,
    center: [f64; 3],
    view: &Viewpoint,
    cfg: &ProjectionConfig,
    canvas: (usize, usize),
) -> Result<ProjectedImage> {
    cfg.validate()?;
    Projector {
        center,
        scale: cfg.scale,
        background: cfg.background,
        width: canvas.0,
        height: canvas.1,
    }
    .project(cloud, view)
}

/// Snapshot pairs `(reference, distorted)` for every viewpoint, rendered with
/// the reference centroid and one shared canvas.
pub fn project_pair(
    reference: &PointCloud,
    distorted: &PointCloud,
    cfg: &ProjectionConfig,
) -> Result<Vec<(ProjectedImage, ProjectedImage)>> {
    let projector = Projector::for_pair(reference, distorted, cfg, 0)?;
    let views = cfg.viewpoints()?;
    views
        .viewpoints
        .iter()
        .map(|v| Ok((projector.project(reference, v)?, projector.project(distorted, v)?)))
        .collect()
}
