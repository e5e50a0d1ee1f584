//! Separable correlation helpers.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::Plane;

pub(crate) fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - half;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

pub(crate) fn uniform_kernel(size: usize) -> Vec<f64> {
    vec![1.0 / size as f64; size]
}

/// Separable filtering keeping only fully covered positions; output is
/// `(w - k + 1) x (h - k + 1)`.
pub(crate) fn filter_valid(p: &Plane, k: &[f64]) -> Plane {
    let n = k.len();
    let (w, h) = (p.width, p.height);
    let ow = w + 1 - n;
    let oh = h + 1 - n;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        let src = &p.data[y * w..(y + 1) * w];
        let dst = &mut rows[y * ow..(y + 1) * ow];
        for (x, out) in dst.iter_mut().enumerate() {
            *out = src[x..x + n].iter().zip(k).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for (j, &kv) in k.iter().enumerate() {
        for y in 0..oh {
            let src = &rows[(y + j) * ow..(y + j + 1) * ow];
            let dst = &mut out[y * ow..(y + 1) * ow];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += kv * s;
            }
        }
    }
    Plane::new(ow, oh, out)
}

/// Mirror index without repeating the edge sample (`-1 -> 1`, `n -> n - 2`).
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= n as isize {
        m = period - m;
    }
    m as usize
}

/// Separable filtering with mirrored borders; output has the input size.
pub(crate) fn filter_same(p: &Plane, k: &[f64]) -> Plane {
    let half = (k.len() / 2) as isize;
    let (w, h) = (p.width, p.height);
    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        let src = &p.data[y * w..(y + 1) * w];
        for x in 0..w {
            rows[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(j, kv)| kv * src[reflect(x as isize + j as isize - half, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for (j, kv) in k.iter().enumerate() {
            let sy = reflect(y as isize + j as isize - half, h);
            let src = &rows[sy * w..(sy + 1) * w];
            let dst = &mut out[y * w..(y + 1) * w];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += kv * s;
            }
        }
    }
    Plane::new(w, h, out)
}

pub(crate) fn map2(a: &Plane, b: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
    Plane::new(
        a.width,
        a.height,
        a.data.iter().zip(&b.data).map(|(x, y)| f(*x, *y)).collect(),
    )
}
