//! Gaussian / Laplacian pyramid steps with the 5-tap binomial filter.

use alloc::vec;

use super::filter::reflect;
use super::Plane;

const BINOMIAL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Low-pass filter and keep every second sample; output is `ceil(n / 2)`.
pub fn reduce(p: &Plane) -> Plane {
    let (w, h) = (p.width, p.height);
    let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for ox in 0..ow {
            let x = (2 * ox) as isize;
            rows[y * ow + ox] = BINOMIAL
                .iter()
                .enumerate()
                .map(|(j, k)| k * p.data[y * w + reflect(x + j as isize - 2, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for oy in 0..oh {
        let y = (2 * oy) as isize;
        for (j, k) in BINOMIAL.iter().enumerate() {
            let sy = reflect(y + j as isize - 2, h);
            for ox in 0..ow {
                out[oy * ow + ox] += k * rows[sy * ow + ox];
            }
        }
    }
    Plane::new(ow, oh, out)
}

/// Zero-insert upsampling to `width x height` followed by the doubled
/// binomial filter, the prediction step of a Laplacian pyramid.
pub fn expand(p: &Plane, width: usize, height: usize) -> Plane {
    let up_x = |src: &[f64], n_out: usize, x: usize| -> f64 {
        BINOMIAL
            .iter()
            .enumerate()
            .map(|(j, k)| {
                let t = reflect(x as isize + j as isize - 2, n_out);
                if t.is_multiple_of(2) {
                    2.0 * k * src[t / 2]
                } else {
                    0.0
                }
            })
            .sum()
    };
    let mut rows = vec![0.0; width * p.height];
    for y in 0..p.height {
        let src = &p.data[y * p.width..(y + 1) * p.width];
        for x in 0..width {
            rows[y * width + x] = up_x(src, width, x);
        }
    }
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for (j, k) in BINOMIAL.iter().enumerate() {
            let t = reflect(y as isize + j as isize - 2, height);
            if t.is_multiple_of(2) {
                let src = &rows[(t / 2) * width..(t / 2 + 1) * width];
                for x in 0..width {
                    out[y * width + x] += 2.0 * k * src[x];
                }
            }
        }
    }
    Plane::new(width, height, out)
}
