//! Information-content weighted SSIM.
//!
//! Both images are decomposed into a Gaussian pyramid. At every scale but
//! the coarsest the contrast-structure map is pooled with a weight equal to
//! the mutual information between a Gaussian reference source and its two
//! perceptually noisy observations (reference and distorted), estimated from
//! local statistics of the Laplacian detail band. The coarsest scale pools
//! luminance times contrast-structure uniformly.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::filter::{filter_same, map2, uniform_kernel};
use super::pyramid::expand;
use super::ssim::{check_pyramid, gaussian_pyramid, ssim_maps};
use super::{signed_pow, IwSsimParams, Plane};
use crate::Result;

const EPSILON: f64 = 1e-10;

/// Per-pixel information-content weight of aligned reference `x` and
/// distorted `y` planes, same size as the inputs.
///
/// With local reference variance `s1`, distorted variance `s2`, covariance
/// `s12`, gain `g = s12 / s1` and residual `v = s2 - g s12`, the weight is
/// `½ log2(1 + s1/n + g² s1 / (v + n))` for perceptual noise variance `n`,
/// floored at zero.
pub fn info_weight_map(x: &Plane, y: &Plane, params: &IwSsimParams) -> Result<Plane> {
    x.same_dims(y)?;
    params.validate()?;
    Ok(weights(x, y, params.info_window, params.noise_variance))
}

fn weights(x: &Plane, y: &Plane, window: usize, noise: f64) -> Plane {
    let k = uniform_kernel(window);
    let mu_x = filter_same(x, &k);
    let mu_y = filter_same(y, &k);
    let xx = filter_same(&map2(x, x, |a, b| a * b), &k);
    let yy = filter_same(&map2(y, y, |a, b| a * b), &k);
    let xy = filter_same(&map2(x, y, |a, b| a * b), &k);
    let data = (0..x.data.len())
        .map(|i| {
            let (mx, my) = (mu_x.data[i], mu_y.data[i]);
            let s1 = local_variance(xx.data[i], mx);
            let s2 = local_variance(yy.data[i], my);
            let s12 = if s1 == 0.0 || s2 == 0.0 {
                0.0
            } else {
                xy.data[i] - mx * my
            };
            let g = s12 / (s1 + EPSILON);
            let v = (s2 - g * s12).max(0.0);
            let w = 0.5 * (1.0 + s1 / noise + g * g * s1 / (v + noise)).log2();
            if w.is_finite() {
                w.max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    Plane::new(x.width, x.height, data)
}

/// `E[x²] - E[x]²`, with cancellation noise on flat windows snapped to zero.
#[inline]
fn local_variance(second_moment: f64, mean: f64) -> f64 {
    let v = second_moment - mean * mean;
    if v <= 1e-12 * (second_moment + 1.0) {
        0.0
    } else {
        v
    }
}

/// Intermediate results of one IW-SSIM evaluation, for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct IwSsimDetail {
    pub score: f64,
    /// Pooled similarity at each scale before exponentiation.
    pub scale_scores: Vec<f64>,
    /// Uniformly pooled similarity at each scale, for comparison.
    pub unweighted_scores: Vec<f64>,
    /// Weight maps for all scales but the coarsest, cropped to the SSIM map
    /// support.
    pub weight_maps: Vec<Plane>,
    /// Contrast-structure maps per scale (luminance folded in at the coarsest).
    pub similarity_maps: Vec<Plane>,
}

pub fn iw_ssim(x: &Plane, y: &Plane, params: &IwSsimParams) -> Result<f64> {
    iw_ssim_detailed(x, y, params).map(|d| d.score)
}

pub fn iw_ssim_detailed(x: &Plane, y: &Plane, params: &IwSsimParams) -> Result<IwSsimDetail> {
    params.validate()?;
    x.same_dims(y)?;
    check_pyramid(x, params)?;
    let gx = gaussian_pyramid(x, params.scales);
    let gy = gaussian_pyramid(y, params.scales);
    let border = params.window_size / 2;
    let last = params.scales - 1;

    let mut detail = IwSsimDetail {
        score: 1.0,
        scale_scores: Vec::with_capacity(params.scales),
        unweighted_scores: Vec::with_capacity(params.scales),
        weight_maps: Vec::with_capacity(last),
        similarity_maps: Vec::with_capacity(params.scales),
    };
    for s in 0..params.scales {
        let maps = ssim_maps(&gx[s], &gy[s], params);
        let (pooled, unweighted, similarity) = if s == last {
            let sim = map2(&maps.cs, &maps.luminance, |c, l| c * l);
            (maps.mean, maps.mean, sim)
        } else {
            let (w, h) = (gx[s].width, gx[s].height);
            let band_x = map2(&gx[s], &expand(&gx[s + 1], w, h), |a, b| a - b);
            let band_y = map2(&gy[s], &expand(&gy[s + 1], w, h), |a, b| a - b);
            let full = weights(&band_x, &band_y, params.info_window, params.noise_variance);
            let weight = full.crop(border, border, maps.cs.width, maps.cs.height);
            let pooled = weighted_mean(&maps.cs, &weight);
            detail.weight_maps.push(weight);
            (pooled, maps.cs.mean(), maps.cs)
        };
        detail.scale_scores.push(pooled);
        detail.unweighted_scores.push(unweighted);
        detail.similarity_maps.push(similarity);
        detail.score *= signed_pow(pooled, params.scale_weights[s]);
    }
    Ok(detail)
}

/// `Σ w v / Σ w`, falling back to the plain mean when all weights vanish.
pub(crate) fn weighted_mean(values: &Plane, weights: &Plane) -> f64 {
    let total: f64 = weights.data.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return values.mean();
    }
    values.data.iter().zip(&weights.data).map(|(v, w)| v * w).sum::<f64>() / total
}
