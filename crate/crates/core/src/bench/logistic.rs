//! Monotone logistic mapping of objective scores onto MOS.
//!
//! `f(x) = b1 (1/2 - 1/(1 + exp(b2 (x - b3)))) + b4 x + b5`, with `b4`
//! pinned to zero when the linear term is disabled. The fit runs
//! Levenberg-Marquardt on standardized scores from a fixed grid of
//! starting points and keeps the lowest residual sum of squares.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use super::correlation::{mean, pearson};
use crate::linalg::solve;
use crate::{Error, Result};

pub const MIN_FIT_SAMPLES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    /// Fit the `b4 x` term (5 parameters) instead of the pure 4-parameter
    /// logistic.
    pub linear_term: bool,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { linear_term: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Logistic,
    /// Least-squares straight line; used when no logistic start beats it.
    Linear,
    /// `f(x) = x`; used for constant objective scores.
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    /// `[b1, b2, b3, b4, b5]` in the units of the objective score.
    pub params: [f64; 5],
    pub kind: FitKind,
    pub mapped: Vec<f64>,
    /// `mos - mapped`.
    pub residuals: Vec<f64>,
}

impl LogisticFit {
    pub fn map(&self, x: f64) -> f64 {
        logistic(&self.params, x)
    }

    pub fn sse(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }
}

/// Logistic `1 / (1 + exp(t))` without overflow.
fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

pub fn logistic(p: &[f64; 5], x: f64) -> f64 {
    p[0] * (0.5 - sigmoid_neg(p[1] * (x - p[2]))) + p[3] * x + p[4]
}

/// Value and gradient of the model with respect to all five parameters.
fn value_and_gradient(p: &[f64; 5], x: f64) -> (f64, [f64; 5]) {
    let l = sigmoid_neg(p[1] * (x - p[2]));
    let dl = l * (1.0 - l);
    let value = p[0] * (0.5 - l) + p[3] * x + p[4];
    (value, [0.5 - l, p[0] * dl * (x - p[2]), -p[0] * dl * p[1], x, 1.0])
}

fn sse(p: &[f64; 5], x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| (b - logistic(p, a)).powi(2)).sum()
}

/// Levenberg-Marquardt refinement over the parameters flagged in `free`.
fn levenberg_marquardt(mut p: [f64; 5], free: &[usize], x: &[f64], y: &[f64]) -> ([f64; 5], f64) {
    let m = free.len();
    let mut cost = sse(&p, x, y);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let mut jtj = vec![vec![0.0; m]; m];
        let mut jtr = vec![0.0; m];
        for (&a, &b) in x.iter().zip(y) {
            let (v, g) = value_and_gradient(&p, a);
            let r = b - v;
            for i in 0..m {
                jtr[i] += g[free[i]] * r;
                for j in 0..m {
                    jtj[i][j] += g[free[i]] * g[free[j]];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for i in 0..m {
                a[i][i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(step) = solve(a, jtr.clone()) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial = p;
            for i in 0..m {
                trial[free[i]] += step[i];
            }
            let trial_cost = sse(&trial, x, y);
            if trial_cost.is_finite() && trial_cost <= cost {
                let gain = cost - trial_cost;
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-15);
                improved = gain > 1e-10 * cost;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (p, cost)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn finish(params: [f64; 5], kind: FitKind, mos: &[f64], mapped: Vec<f64>) -> LogisticFit {
    let residuals = mos.iter().zip(&mapped).map(|(m, f)| m - f).collect();
    LogisticFit {
        params,
        kind,
        mapped,
        residuals,
    }
}

/// Fits the mapping from objective scores to MOS.
///
/// The result's Pearson correlation with MOS is never below the absolute
/// Pearson correlation of the raw scores: when no logistic candidate
/// reaches it, the least-squares line is returned with [`FitKind::Linear`].
pub fn fit_logistic(objective: &[f64], mos: &[f64], config: &LogisticConfig) -> Result<LogisticFit> {
    if objective.len() != mos.len() {
        return Err(Error::Statistics(format!(
            "length mismatch: {} objective scores vs {} MOS values",
            objective.len(),
            mos.len()
        )));
    }
    if objective.len() < MIN_FIT_SAMPLES {
        return Err(Error::Statistics(format!(
            "logistic fit needs at least {MIN_FIT_SAMPLES} samples, got {}",
            objective.len()
        )));
    }
    if objective.iter().chain(mos).any(|v| !v.is_finite()) {
        return Err(Error::Statistics("non-finite value in logistic fit input".into()));
    }
    let mx = mean(objective);
    let sx = (objective.iter().map(|v| (v - mx) * (v - mx)).sum::<f64>() / objective.len() as f64).sqrt();
    if sx == 0.0 || !objective.iter().any(|&v| v != objective[0]) {
        return Ok(finish(
            [0.0, 0.0, 0.0, 1.0, 0.0],
            FitKind::Identity,
            mos,
            objective.to_vec(),
        ));
    }
    let xs: Vec<f64> = objective.iter().map(|v| (v - mx) / sx).collect();
    let my = mean(mos);
    let y_min = mos.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = mos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = (y_max - y_min).max(1e-9);

    // least-squares line in standardized units
    let sxy: f64 = xs.iter().zip(mos).map(|(x, y)| x * (y - my)).sum();
    let slope = sxy / xs.len() as f64;
    let line = [0.0, 0.0, 0.0, slope, my];
    let raw_plcc = pearson(objective, mos).map(f64::abs).unwrap_or(0.0);

    let free: &[usize] = if config.linear_term {
        &[0, 1, 2, 3, 4]
    } else {
        &[0, 1, 2, 4]
    };
    let direction = if slope < 0.0 { -1.0 } else { 1.0 };
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<([f64; 5], f64)> = None;
    for amplitude in [1.0, 2.0, 4.0] {
        for steepness in [0.5, 1.0, 2.0, 4.0] {
            for q in [0.25, 0.5, 0.75] {
                let start = [
                    direction * amplitude * range,
                    steepness,
                    quantile_sorted(&sorted, q),
                    0.0,
                    my,
                ];
                let (p, cost) = levenberg_marquardt(start, free, &xs, mos);
                if cost.is_finite() && best.is_none_or(|(_, c)| cost < c) {
                    best = Some((p, cost));
                }
            }
        }
    }

    let to_original = |p: [f64; 5]| [p[0], p[1] / sx, mx + sx * p[2], p[3] / sx, p[4] - p[3] * mx / sx];
    if let Some((p, _)) = best {
        let mapped: Vec<f64> = xs.iter().map(|&x| logistic(&p, x)).collect();
        let plcc = pearson(&mapped, mos).unwrap_or(f64::NEG_INFINITY);
        if plcc >= raw_plcc {
            return Ok(finish(to_original(p), FitKind::Logistic, mos, mapped));
        }
    }
    let mapped = xs.iter().map(|&x| logistic(&line, x)).collect();
    Ok(finish(to_original(line), FitKind::Linear, mos, mapped))
}
