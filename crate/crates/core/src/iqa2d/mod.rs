//! Full-reference 2D image quality kernels applied to projected snapshots.

mod filter;
mod iwssim;
mod pyramid;
mod ssim;

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use iwssim::{info_weight_map, iw_ssim, iw_ssim_detailed, IwSsimDetail};
pub use pyramid::{expand, reduce};
pub use ssim::{ms_ssim, ssim, SsimMaps};

/// PSNR reported for identical inputs so aggregates stay finite.
pub const PSNR_CAP: f64 = 100.0;

/// A single real-valued image plane, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

/// Luma plane with values in `[0, 255]`.
pub type LumaImage = Plane;

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "plane data does not match dimensions");
        Self { width, height, data }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Sub-rectangle starting at `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Plane {
        let mut data = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + width]);
        }
        Plane { width, height, data }
    }

    fn same_dims(&self, other: &Plane) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }
}

/// BT.601 luma.
pub fn to_luma(width: usize, height: usize, rgb: &[[u8; 3]]) -> LumaImage {
    let data = rgb.iter().map(|&c| luma(c)).collect();
    Plane::new(width, height, data)
}

#[inline]
pub fn luma(c: [u8; 3]) -> f64 {
    // integer weights in thousandths keep grays exact
    let y = 299 * u32::from(c[0]) + 587 * u32::from(c[1]) + 114 * u32::from(c[2]);
    f64::from(y) / 1000.0
}

/// `10 log10(peak² / MSE)`; `+inf` when the planes are identical.
pub fn psnr(x: &Plane, y: &Plane, peak: f64) -> Result<f64> {
    x.same_dims(y)?;
    let mse = x.data.iter().zip(&y.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.data.len() as f64;
    Ok(psnr_from_mse(mse, peak))
}

pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

pub fn cap_psnr(db: f64) -> f64 {
    db.min(PSNR_CAP)
}

/// Parameters shared by the SSIM family. Defaults are the published
/// SSIM / MS-SSIM / IW-SSIM settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IwSsimParams {
    pub scales: usize,
    pub window_size: usize,
    pub window_sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
    pub scale_weights: Vec<f64>,
    /// Side of the uniform window used for information-content statistics.
    pub info_window: usize,
    /// Variance of the perceptual noise in the information-content model.
    pub noise_variance: f64,
}

impl Default for IwSsimParams {
    fn default() -> Self {
        Self {
            scales: 5,
            window_size: 11,
            window_sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
            scale_weights: vec![0.0448, 0.2856, 0.3001, 0.2363, 0.1333],
            info_window: 3,
            noise_variance: 0.4,
        }
    }
}

/// The published scale weights sum to 1.0001, so the check is loose.
const SCALE_WEIGHT_SUM_TOLERANCE: f64 = 1e-3;

impl IwSsimParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(alloc::format!("IW-SSIM parameter {what}")));
        if self.scales == 0 || self.scale_weights.len() != self.scales {
            return bad("scale_weights must have one entry per scale");
        }
        if (self.scale_weights.iter().sum::<f64>() - 1.0).abs() > SCALE_WEIGHT_SUM_TOLERANCE {
            return bad("scale_weights must sum to 1");
        }
        if self.window_size == 0
            || self.window_size.is_multiple_of(2)
            || self.info_window == 0
            || self.info_window.is_multiple_of(2)
        {
            return bad("windows must have odd positive size");
        }
        let positive = [
            self.window_sigma,
            self.k1,
            self.k2,
            self.dynamic_range,
            self.noise_variance,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.scale_weights.iter().any(|w| !(*w > 0.0)) {
            return bad("values must be positive and finite");
        }
        Ok(())
    }

    pub(crate) fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub(crate) fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }
}

/// `sign(v) |v|^e`, keeping negative structure scores real-valued.
pub(crate) fn signed_pow(v: f64, e: f64) -> f64 {
    if v >= 0.0 {
        v.powf(e)
    } else {
        -(-v).powf(e)
    }
}
