//! Mean opinion scores from raw ratings: per-subject z-scores, score-level
//! outlier rejection with the kurtosis-conditioned BT.500 thresholds, and a
//! dataset-wide linear rescale to `[0, 100]`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MOS_MIN: f64 = 0.0;
pub const MOS_MAX: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub stimulus: String,
    pub subject: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    pub score: f64,
}

/// Raw opinion scores of a subjective study.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SubjectiveDataset {
    pub ratings: Vec<Rating>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZScoreGranularity {
    /// One mean/deviation per subject over all of their ratings.
    #[default]
    Subject,
    /// One mean/deviation per (subject, session).
    SubjectSession,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MosConfig {
    pub granularity: ZScoreGranularity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionRule {
    /// Kurtosis in `[2, 4]`: reject beyond 2 standard deviations.
    TwoSigma,
    /// Otherwise: reject beyond `sqrt(20)` standard deviations.
    Sqrt20Sigma,
    /// Zero spread; nothing can be rejected.
    NoSpread,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessedRating {
    pub stimulus: String,
    pub subject: String,
    pub session: Option<String>,
    pub score: f64,
    pub z: f64,
    /// Rescaled z-score in `[0, 100]`.
    pub rescaled: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusMos {
    pub stimulus: String,
    pub mos: f64,
    /// Sample standard deviation of the valid rescaled scores.
    pub std: f64,
    pub valid: usize,
    pub rejected: usize,
    pub rule: RejectionRule,
}

/// Derived quantities of a [`SubjectiveDataset`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MosTable {
    /// One entry per stimulus, ordered by stimulus id.
    pub stimuli: Vec<StimulusMos>,
    /// Ratings in input order with their derived values.
    pub ratings: Vec<ProcessedRating>,
    /// Range of valid z-scores mapped onto `[0, 100]`.
    pub z_range: (f64, f64),
}

impl MosTable {
    pub fn get(&self, stimulus: &str) -> Option<&StimulusMos> {
        self.stimuli
            .binary_search_by(|s| s.stimulus.as_str().cmp(stimulus))
            .ok()
            .map(|i| &self.stimuli[i])
    }
}

/// Mean and sample standard deviation of values visited in sorted order so
/// the result does not depend on input order.
fn sorted_mean_std(values: &mut [f64]) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Marks the scores of one stimulus that the BT.500 screening rejects.
/// Returns the rule applied and a keep-flag per score.
pub fn screen_scores(values: &[f64]) -> (RejectionRule, Vec<bool>) {
    let mut sorted = values.to_vec();
    let (mean, sigma) = sorted_mean_std(&mut sorted);
    if sigma == 0.0 || values.len() < 2 {
        return (RejectionRule::NoSpread, alloc::vec![true; values.len()]);
    }
    let n = values.len() as f64;
    let m2 = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = sorted.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let kurtosis = m4 / (m2 * m2);
    let (rule, threshold) = if (2.0..=4.0).contains(&kurtosis) {
        (RejectionRule::TwoSigma, 2.0 * sigma)
    } else {
        (RejectionRule::Sqrt20Sigma, 20f64.sqrt() * sigma)
    };
    (rule, values.iter().map(|v| (v - mean).abs() <= threshold).collect())
}

pub fn compute_mos(dataset: &SubjectiveDataset, config: &MosConfig) -> Result<MosTable> {
    let ratings = &dataset.ratings;
    if ratings.is_empty() {
        return Err(Error::Statistics("no ratings".into()));
    }
    if let Some(r) = ratings.iter().find(|r| !r.score.is_finite()) {
        return Err(Error::Statistics(alloc::format!(
            "non-finite score from subject {} for stimulus {}",
            r.subject,
            r.stimulus
        )));
    }

    // z-scores per normalization group
    let group_key = |r: &Rating| -> (String, Option<String>) {
        match config.granularity {
            ZScoreGranularity::Subject => (r.subject.clone(), None),
            ZScoreGranularity::SubjectSession => (r.subject.clone(), r.session.clone()),
        }
    };
    let mut groups: BTreeMap<(String, Option<String>), Vec<f64>> = BTreeMap::new();
    for r in ratings {
        groups.entry(group_key(r)).or_default().push(r.score);
    }
    let stats: BTreeMap<_, _> = groups
        .into_iter()
        .map(|(k, mut v)| (k, sorted_mean_std(&mut v)))
        .collect();
    let z: Vec<f64> = ratings
        .iter()
        .map(|r| {
            let (mean, sd) = stats[&group_key(r)];
            if sd == 0.0 {
                0.0
            } else {
                (r.score - mean) / sd
            }
        })
        .collect();

    // screening per stimulus, with scores ordered by (subject, session)
    let mut by_stimulus: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in ratings.iter().enumerate() {
        by_stimulus.entry(r.stimulus.as_str()).or_default().push(i);
    }
    let mut valid = alloc::vec![false; ratings.len()];
    let mut rules = BTreeMap::new();
    for (stimulus, idx) in by_stimulus.iter_mut() {
        idx.sort_by(|&a, &b| {
            (&ratings[a].subject, &ratings[a].session, z[a].to_bits()).cmp(&(
                &ratings[b].subject,
                &ratings[b].session,
                z[b].to_bits(),
            ))
        });
        let values: Vec<f64> = idx.iter().map(|&i| z[i]).collect();
        let (rule, keep) = screen_scores(&values);
        for (&i, k) in idx.iter().zip(keep) {
            valid[i] = k;
        }
        rules.insert(*stimulus, rule);
    }

    let (z_min, z_max) = z
        .iter()
        .zip(&valid)
        .filter(|(_, &v)| v)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&z, _)| {
            (lo.min(z), hi.max(z))
        });
    let rescale = |z: f64| {
        if z_max > z_min {
            (MOS_MIN + (MOS_MAX - MOS_MIN) * (z - z_min) / (z_max - z_min)).clamp(MOS_MIN, MOS_MAX)
        } else {
            (MOS_MIN + MOS_MAX) / 2.0
        }
    };

    let processed: Vec<ProcessedRating> = ratings
        .iter()
        .zip(&z)
        .zip(&valid)
        .map(|((r, &z), &valid)| ProcessedRating {
            stimulus: r.stimulus.clone(),
            subject: r.subject.clone(),
            session: r.session.clone(),
            score: r.score,
            z,
            rescaled: rescale(z),
            valid,
        })
        .collect();

    let mut stimuli = Vec::with_capacity(by_stimulus.len());
    for (stimulus, idx) in &by_stimulus {
        let mut kept: Vec<f64> = idx
            .iter()
            .filter(|&&i| valid[i])
            .map(|&i| processed[i].rescaled)
            .collect();
        if kept.len() < 2 {
            return Err(Error::InsufficientScores {
                stimulus: String::from(*stimulus),
                remaining: kept.len(),
            });
        }
        let (mos, std) = sorted_mean_std(&mut kept);
        stimuli.push(StimulusMos {
            stimulus: String::from(*stimulus),
            mos,
            std,
            valid: kept.len(),
            rejected: idx.len() - kept.len(),
            rule: rules[stimulus],
        });
    }
    Ok(MosTable {
        stimuli,
        ratings: processed,
        z_range: (z_min, z_max),
    })
}
