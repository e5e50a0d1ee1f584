//! Residual-variance F-test between pairs of objective models.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::correlation::sample_variance;
use crate::special::f_quantile;
use crate::{Error, Result};

/// Smallest residual count for which the variance-ratio test is applied.
pub const MIN_SIGNIFICANCE_SAMPLES: usize = 50;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Significance {
    /// Row model has significantly smaller residual variance.
    Better,
    /// Row model has significantly larger residual variance.
    Worse,
    Indistinguishable,
}

impl Significance {
    pub fn symbol(self) -> char {
        match self {
            Significance::Better => '1',
            Significance::Worse => '0',
            Significance::Indistinguishable => '-',
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Significance::Better => Significance::Worse,
            Significance::Worse => Significance::Better,
            Significance::Indistinguishable => Significance::Indistinguishable,
        }
    }
}

impl fmt::Display for Significance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceMatrix {
    pub entries: Vec<Vec<Significance>>,
    pub variances: Vec<f64>,
    /// Upper critical value of the variance ratio; the lower one is its
    /// reciprocal since both samples have the same size.
    pub critical_ratio: f64,
    pub confidence: f64,
    pub samples: usize,
}

/// Critical ratio `F_{(1+c)/2}(n-1, n-1)` of the two-sided test.
pub fn critical_ratio(samples: usize, confidence: f64) -> f64 {
    let df = samples as f64 - 1.0;
    f_quantile(0.5 + confidence / 2.0, df, df)
}

/// Two-sided equal-sample-size F-test of `var_a` against `var_b`, from the
/// point of view of model `a`.
pub fn compare_variances(var_a: f64, var_b: f64, critical: f64) -> Significance {
    if var_a == var_b {
        return Significance::Indistinguishable;
    }
    let (small, large) = if var_a < var_b { (var_a, var_b) } else { (var_b, var_a) };
    let significant = if small == 0.0 { true } else { large / small > critical };
    match (significant, var_a < var_b) {
        (false, _) => Significance::Indistinguishable,
        (true, true) => Significance::Better,
        (true, false) => Significance::Worse,
    }
}

/// Pairwise significance of the residual vectors of several models.
pub fn significance_matrix(residuals: &[Vec<f64>], confidence: f64) -> Result<SignificanceMatrix> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    let samples = residuals.first().map_or(0, Vec::len);
    if let Some(bad) = residuals.iter().find(|r| r.len() != samples) {
        return Err(Error::Statistics(format!(
            "residual vectors differ in length: {samples} vs {}",
            bad.len()
        )));
    }
    if !residuals.is_empty() && samples < MIN_SIGNIFICANCE_SAMPLES {
        return Err(Error::Statistics(format!(
            "variance-ratio test needs at least {MIN_SIGNIFICANCE_SAMPLES} samples, got {samples}"
        )));
    }
    let variances: Vec<f64> = residuals.iter().map(|r| sample_variance(r)).collect();
    let critical = critical_ratio(samples.max(2), confidence);
    let m = residuals.len();
    let mut entries = alloc::vec![alloc::vec![Significance::Indistinguishable; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let s = compare_variances(variances[i], variances[j], critical);
            entries[i][j] = s;
            entries[j][i] = s.flipped();
        }
    }
    Ok(SignificanceMatrix {
        entries,
        variances,
        critical_ratio: critical,
        confidence,
        samples,
    })
}
