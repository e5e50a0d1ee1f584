//! Full-reference quality assessment for colored point clouds.
//!
//! This crate holds the allocation-only algorithmic core: the point cloud
//! model and spatial index, icosphere viewpoints, orthographic snapshot
//! rendering, the 2D image quality kernels (PSNR, SSIM, MS-SSIM, IW-SSIM),
//! point-based and projection-based metric drivers, the distortion
//! generators, and the subjective-score evaluation statistics.
//!
//! File formats, parallel drivers and the command line live in the `pcqa`
//! companion crate.

#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bench;
pub mod cloud;
pub mod distort;
mod error;
pub mod iqa2d;
mod linalg;
pub mod metrics;
pub mod project;
mod special;
pub mod view;

pub use error::{Error, Result};

// Modules import `num_traits::Float` for libm-backed float methods. It is
// reported unused whenever a dependency enables `num-traits/std`.

/// Rounds half away from zero, the pixel/voxel rounding rule used throughout.
#[inline]
pub fn round_half_away(x: f64) -> f64 {
    libm::round(x)
}
