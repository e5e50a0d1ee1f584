//! Subjective-score processing and objective-model evaluation: MOS,
//! logistic mapping, PLCC/SRCC/RMSE, and the residual-variance
//! significance matrix.

pub mod correlation;
pub mod logistic;
pub mod mos;
pub mod significance;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

pub use correlation::{average_ranks, correlations, pearson, rmse, spearman, Correlations};
pub use logistic::{fit_logistic, logistic, FitKind, LogisticConfig, LogisticFit};
pub use mos::{
    compute_mos, screen_scores, MosConfig, MosTable, ProcessedRating, Rating, RejectionRule, StimulusMos,
    SubjectiveDataset, ZScoreGranularity,
};
pub use significance::{
    compare_variances, critical_ratio, significance_matrix, Significance, SignificanceMatrix, DEFAULT_CONFIDENCE,
    MIN_SIGNIFICANCE_SAMPLES,
};

use crate::{Error, Result};

/// Manifest entry describing how a stimulus was produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stimulus {
    pub id: String,
    /// Source content (reference cloud) the stimulus derives from.
    pub content: String,
    /// Distortion type label, e.g. `downsampling` or `gaussian_noise`.
    pub distortion: String,
}

/// One objective score of one stimulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub stimulus: String,
    pub metric: String,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub logistic: LogisticConfig,
    pub mos: MosConfig,
    pub confidence: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            logistic: LogisticConfig::default(),
            mos: MosConfig::default(),
            confidence: DEFAULT_CONFIDENCE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetKind {
    Content,
    Distortion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetResult {
    pub kind: SubsetKind,
    pub name: String,
    pub count: usize,
    /// `None` when the subset has fewer than 3 stimuli or no spread.
    pub correlations: Option<Correlations>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEvaluation {
    pub metric: String,
    /// Raw objective scores in stimulus order.
    pub objective: Vec<f64>,
    pub fit: LogisticFit,
    pub overall: Correlations,
    pub subsets: Vec<SubsetResult>,
}

/// Agreement of one subject's ratings with MOS, averaged over contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectPerformance {
    pub subject: String,
    pub contents: usize,
    pub plcc_mean: f64,
    pub plcc_std: f64,
    pub srcc_mean: f64,
    pub srcc_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Stimulus ids, sorted; all per-stimulus vectors follow this order.
    pub stimuli: Vec<String>,
    pub mos: Vec<f64>,
    pub metrics: Vec<MetricEvaluation>,
    /// Present when there are at least [`MIN_SIGNIFICANCE_SAMPLES`] stimuli.
    pub significance: Option<SignificanceMatrix>,
    pub subjects: Vec<SubjectPerformance>,
    pub manifest: Option<Vec<Stimulus>>,
}

impl EvalResult {
    pub fn metric(&self, name: &str) -> Option<&MetricEvaluation> {
        self.metrics.iter().find(|m| m.metric == name)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Raw scores and MOS of one subject's ratings of one content.
type PairedScores = (Vec<f64>, Vec<f64>);

/// Per-subject PLCC/SRCC against MOS, computed per content and averaged.
pub fn subject_performance(table: &MosTable, manifest: Option<&BTreeMap<&str, &Stimulus>>) -> Vec<SubjectPerformance> {
    let mut per_subject: BTreeMap<&str, BTreeMap<&str, PairedScores>> = BTreeMap::new();
    for r in &table.ratings {
        let Some(m) = table.get(&r.stimulus) else { continue };
        let content = manifest
            .and_then(|m| m.get(r.stimulus.as_str()))
            .map_or("", |s| s.content.as_str());
        let entry = per_subject.entry(&r.subject).or_default().entry(content).or_default();
        entry.0.push(r.score);
        entry.1.push(m.mos);
    }
    per_subject
        .into_iter()
        .filter_map(|(subject, contents)| {
            let mut plcc = Vec::new();
            let mut srcc = Vec::new();
            for (scores, mos) in contents.values() {
                if let Ok(c) = correlations(scores, mos) {
                    plcc.push(c.plcc);
                    srcc.push(c.srcc);
                }
            }
            if plcc.is_empty() {
                return None;
            }
            let (plcc_mean, plcc_std) = mean_std(&plcc);
            let (srcc_mean, srcc_std) = mean_std(&srcc);
            Some(SubjectPerformance {
                subject: String::from(subject),
                contents: plcc.len(),
                plcc_mean,
                plcc_std,
                srcc_mean,
                srcc_std,
            })
        })
        .collect()
}

/// Fits and scores every metric against MOS computed from `ratings`.
///
/// Every rated stimulus needs one score per metric and, when a manifest is
/// given, a manifest entry; violations are reported together as
/// [`Error::UnmatchedStimuli`].
pub fn run_benchmark(
    ratings: &SubjectiveDataset,
    scores: &[MetricSample],
    manifest: Option<&[Stimulus]>,
    config: &BenchConfig,
) -> Result<EvalResult> {
    let table = compute_mos(ratings, &config.mos)?;
    let stimuli: Vec<String> = table.stimuli.iter().map(|s| s.stimulus.clone()).collect();
    let mos: Vec<f64> = table.stimuli.iter().map(|s| s.mos).collect();
    let rated: BTreeSet<&str> = stimuli.iter().map(String::as_str).collect();

    let mut metric_order: Vec<&str> = Vec::new();
    let mut values: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    for s in scores {
        if !s.value.is_finite() {
            return Err(Error::Statistics(format!(
                "non-finite {} score for {}",
                s.metric, s.stimulus
            )));
        }
        let per_metric = values.entry(s.metric.as_str()).or_insert_with(|| {
            metric_order.push(s.metric.as_str());
            BTreeMap::new()
        });
        if per_metric.insert(s.stimulus.as_str(), s.value).is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate {} score for stimulus {}",
                s.metric, s.stimulus
            )));
        }
    }
    if metric_order.is_empty() {
        return Err(Error::Statistics("no metric scores".into()));
    }

    let manifest_map: Option<BTreeMap<&str, &Stimulus>> = match manifest {
        None => None,
        Some(entries) => {
            let mut map = BTreeMap::new();
            for e in entries {
                if map.insert(e.id.as_str(), e).is_some() {
                    return Err(Error::InvalidParameter(format!("duplicate manifest entry {}", e.id)));
                }
            }
            Some(map)
        }
    };

    let mut orphans = BTreeSet::new();
    for metric in &metric_order {
        let per_metric = &values[metric];
        for s in &stimuli {
            if !per_metric.contains_key(s.as_str()) {
                orphans.insert(format!("{s} (no {metric} score)"));
            }
        }
        for s in per_metric.keys() {
            if !rated.contains(s) {
                orphans.insert(format!("{s} (no subjective ratings)"));
            }
        }
    }
    if let Some(map) = &manifest_map {
        for s in &stimuli {
            if !map.contains_key(s.as_str()) {
                orphans.insert(format!("{s} (not in manifest)"));
            }
        }
    }
    if !orphans.is_empty() {
        return Err(Error::UnmatchedStimuli(orphans.into_iter().collect()));
    }

    let mut groups: BTreeMap<(SubsetKind, &str), Vec<usize>> = BTreeMap::new();
    if let Some(map) = &manifest_map {
        for (i, s) in stimuli.iter().enumerate() {
            let entry = map[s.as_str()];
            groups
                .entry((SubsetKind::Content, entry.content.as_str()))
                .or_default()
                .push(i);
            groups
                .entry((SubsetKind::Distortion, entry.distortion.as_str()))
                .or_default()
                .push(i);
        }
    }

    let mut metrics = Vec::with_capacity(metric_order.len());
    for metric in &metric_order {
        let objective: Vec<f64> = stimuli.iter().map(|s| values[metric][s.as_str()]).collect();
        let fit = fit_logistic(&objective, &mos, &config.logistic)?;
        let overall = correlations(&fit.mapped, &mos).map_err(|e| Error::Statistics(format!("{metric}: {e}")))?;
        let subsets = groups
            .iter()
            .map(|(&(kind, name), idx)| {
                let p: Vec<f64> = idx.iter().map(|&i| fit.mapped[i]).collect();
                let m: Vec<f64> = idx.iter().map(|&i| mos[i]).collect();
                SubsetResult {
                    kind,
                    name: String::from(name),
                    count: idx.len(),
                    correlations: correlations(&p, &m).ok(),
                }
            })
            .collect();
        metrics.push(MetricEvaluation {
            metric: String::from(*metric),
            objective,
            fit,
            overall,
            subsets,
        });
    }

    let significance = if stimuli.len() >= MIN_SIGNIFICANCE_SAMPLES {
        let residuals: Vec<Vec<f64>> = metrics.iter().map(|m| m.fit.residuals.clone()).collect();
        Some(significance_matrix(&residuals, config.confidence)?)
    } else {
        None
    };
    let subjects = subject_performance(&table, manifest_map.as_ref());
    let manifest = manifest_map.map(|m| stimuli.iter().map(|s| m[s.as_str()].clone()).collect());
    Ok(EvalResult {
        stimuli,
        mos,
        metrics,
        significance,
        subjects,
        manifest,
    })
}
