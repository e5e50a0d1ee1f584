//! Single- and multi-scale structural similarity.

use alloc::vec::Vec;

use super::filter::{filter_valid, gaussian_kernel, map2};
use super::pyramid::reduce;
use super::{signed_pow, IwSsimParams, Plane};
use crate::{Error, Result};

/// SSIM maps over the fully covered window positions. Entry `(x, y)` of a
/// map belongs to the window centred on input pixel `(x + r, y + r)` with
/// `r = window_size / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SsimMaps {
    pub mean: f64,
    /// Contrast-structure term.
    pub cs: Plane,
    /// Luminance term.
    pub luminance: Plane,
}

pub fn ssim(x: &Plane, y: &Plane, params: &IwSsimParams) -> Result<SsimMaps> {
    params.validate()?;
    x.same_dims(y)?;
    if x.width < params.window_size || x.height < params.window_size {
        return Err(Error::ImageTooSmall {
            width: x.width,
            height: x.height,
            min: params.window_size,
        });
    }
    Ok(ssim_maps(x, y, params))
}

pub(crate) fn ssim_maps(x: &Plane, y: &Plane, params: &IwSsimParams) -> SsimMaps {
    let k = gaussian_kernel(params.window_size, params.window_sigma);
    let (c1, c2) = (params.c1(), params.c2());
    let mu_x = filter_valid(x, &k);
    let mu_y = filter_valid(y, &k);
    let xx = filter_valid(&map2(x, x, |a, b| a * b), &k);
    let yy = filter_valid(&map2(y, y, |a, b| a * b), &k);
    let xy = filter_valid(&map2(x, y, |a, b| a * b), &k);
    let n = mu_x.data.len();
    let mut cs = Vec::with_capacity(n);
    let mut lum = Vec::with_capacity(n);
    for i in 0..n {
        let (mx, my) = (mu_x.data[i], mu_y.data[i]);
        let sxx = xx.data[i] - mx * mx;
        let syy = yy.data[i] - my * my;
        let sxy = xy.data[i] - mx * my;
        cs.push((2.0 * sxy + c2) / (sxx + syy + c2));
        lum.push((2.0 * mx * my + c1) / (mx * mx + my * my + c1));
    }
    let mean = cs.iter().zip(&lum).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    SsimMaps {
        mean,
        cs: Plane::new(mu_x.width, mu_x.height, cs),
        luminance: Plane::new(mu_x.width, mu_x.height, lum),
    }
}

/// Dimensions of each pyramid level, checking that the coarsest still fits
/// a window.
pub(crate) fn check_pyramid(x: &Plane, params: &IwSsimParams) -> Result<()> {
    let (mut w, mut h) = (x.width, x.height);
    for _ in 1..params.scales {
        w = w.div_ceil(2);
        h = h.div_ceil(2);
    }
    if w < params.window_size || h < params.window_size {
        let min = params.window_size << (params.scales - 1);
        return Err(Error::ImageTooSmall {
            width: x.width,
            height: x.height,
            min,
        });
    }
    Ok(())
}

pub(crate) fn gaussian_pyramid(x: &Plane, scales: usize) -> Vec<Plane> {
    let mut levels = Vec::with_capacity(scales);
    levels.push(x.clone());
    for s in 1..scales {
        let next = reduce(&levels[s - 1]);
        levels.push(next);
    }
    levels
}

/// Multi-scale SSIM: mean contrast-structure at the finer scales, mean
/// luminance times contrast-structure at the coarsest, combined with the
/// scale weights as exponents.
pub fn ms_ssim(x: &Plane, y: &Plane, params: &IwSsimParams) -> Result<f64> {
    params.validate()?;
    x.same_dims(y)?;
    check_pyramid(x, params)?;
    let px = gaussian_pyramid(x, params.scales);
    let py = gaussian_pyramid(y, params.scales);
    let mut score = 1.0;
    for s in 0..params.scales {
        let maps = ssim_maps(&px[s], &py[s], params);
        let pooled = if s + 1 == params.scales {
            maps.mean
        } else {
            maps.cs.mean()
        };
        score *= signed_pow(pooled, params.scale_weights[s]);
    }
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};

    pub(crate) fn textured(w: usize, h: usize) -> Plane {
        Plane::from_fn(w, h, |x, y| {
            let (fx, fy) = (x as f64, y as f64);
            127.0 + 60.0 * libm::sin(fx / 3.0) * libm::cos(fy / 5.0) + 40.0 * libm::sin((fx + 2.0 * fy) / 11.0)
        })
    }

    fn noisy(p: &Plane, sigma: f64, seed: u64) -> Plane {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n = Normal::new(0.0, sigma).unwrap();
        Plane::new(
            p.width,
            p.height,
            p.data
                .iter()
                .map(|v| (v + n.sample(&mut rng)).clamp(0.0, 255.0))
                .collect(),
        )
    }

    #[test]
    fn identical_inputs_score_one() {
        let p = IwSsimParams::default();
        let x = textured(64, 48);
        assert_eq!(ssim(&x, &x, &p).unwrap().mean, 1.0);
        let c = Plane::filled(20, 20, 90.0);
        assert_eq!(ssim(&c, &c, &p).unwrap().mean, 1.0);
        let x = textured(200, 180);
        assert!((ms_ssim(&x, &x, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverted_texture_scores_low() {
        let x = textured(96, 96);
        let inv = Plane::new(96, 96, x.data.iter().map(|v| 255.0 - v).collect());
        let s = ssim(&x, &inv, &IwSsimParams::default()).unwrap().mean;
        // value recorded from the fixed gradient texture above
        assert!(s < 0.3, "{s}");
        // recorded for this texture
        assert!((s - -0.640676054).abs() < 1e-8, "{s}");
    }

    #[test]
    fn ssim_and_ms_ssim_are_symmetric() {
        let p = IwSsimParams::default();
        let x = textured(180, 190);
        let y = noisy(&x, 12.0, 1);
        let a = ssim(&x, &y, &p).unwrap().mean;
        let b = ssim(&y, &x, &p).unwrap().mean;
        assert!((a - b).abs() < 1e-12);
        let a = ms_ssim(&x, &y, &p).unwrap();
        let b = ms_ssim(&y, &x, &p).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn ms_ssim_decreases_with_noise_and_stays_bounded() {
        let p = IwSsimParams::default();
        let x = textured(192, 192);
        let scores: Vec<f64> = [5.0, 15.0, 30.0]
            .iter()
            .map(|&s| ms_ssim(&x, &noisy(&x, s, 9), &p).unwrap())
            .collect();
        assert!(scores[0] > scores[1] && scores[1] > scores[2], "{scores:?}");
        let inv = Plane::new(192, 192, x.data.iter().map(|v| 255.0 - v).collect());
        let s = ms_ssim(&x, &inv, &p).unwrap();
        assert!((-1.0..=1.0).contains(&s) && s.is_finite());
    }

    #[test]
    fn size_preconditions() {
        let p = IwSsimParams::default();
        let small = Plane::filled(10, 30, 1.0);
        assert!(matches!(ssim(&small, &small, &p), Err(Error::ImageTooSmall { .. })));
        let medium = Plane::filled(150, 200, 1.0);
        assert_eq!(
            ms_ssim(&medium, &medium, &p),
            Err(Error::ImageTooSmall {
                width: 150,
                height: 200,
                min: 176
            })
        );
        let ok = Plane::filled(176, 176, 1.0);
        assert!(ms_ssim(&ok, &ok, &p).is_ok());
    }

    #[test]
    fn degenerate_images_never_produce_nan() {
        let p = IwSsimParams::default();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let black = Plane::filled(180, 180, 0.0);
        let white = Plane::filled(180, 180, 255.0);
        let mut spike = black.clone();
        spike.data[90 * 180 + 90] = 255.0;
        let random = Plane::from_fn(180, 180, |_, _| rng.random_range(0.0..=255.0));
        let set = [&black, &white, &spike, &random];
        for a in set {
            for b in set {
                assert!(ssim(a, b, &p).unwrap().mean.is_finite());
                assert!(ms_ssim(a, b, &p).unwrap().is_finite());
            }
        }
    }
}
