//! Benchmark inputs (rating, score and manifest files) and reports (JSON,
//! CSV, and Markdown tables laid out like the PLCC/SRCC/RMSE and
//! significance tables of a metric comparison).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pcqa_core::bench::{
    run_benchmark, BenchConfig, Correlations, EvalResult, MetricSample, Rating, Stimulus, SubjectiveDataset, SubsetKind,
};
use pcqa_core::metrics::MetricId;
use serde::{Deserialize, Serialize};

use crate::config::config_digest;
use crate::distort::Manifest;
use crate::error::{io_error, Error, Result};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_MARKDOWN: &str = "report.md";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUBJECTS_CSV: &str = "subjects.csv";

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Index of each named column; the first alias found wins.
fn columns(headers: &csv::StringRecord, wanted: &[&[&str]]) -> Vec<Option<usize>> {
    let normalized: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    wanted
        .iter()
        .map(|aliases| aliases.iter().find_map(|a| normalized.iter().position(|h| h == a)))
        .collect()
}

fn require(path: &Path, found: &[Option<usize>], names: &[&str]) -> Result<Vec<usize>> {
    found
        .iter()
        .zip(names)
        .map(|(f, n)| {
            f.ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("missing column '{n}'"),
            })
        })
        .collect()
}

fn field(record: &csv::StringRecord, i: usize) -> &str {
    record.get(i).unwrap_or("").trim()
}

fn number(path: &Path, record: &csv::StringRecord, i: usize, what: &str) -> Result<f64> {
    let raw = field(record, i);
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: record.position().map_or(0, |p| p.line() as usize),
            message: format!("invalid {what} '{raw}'"),
        })
}

/// Reads raw ratings: columns `stimulus_id`, `subject_id`, `raw_score` and
/// optionally `session_id`.
pub fn read_ratings(path: &Path) -> Result<SubjectiveDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error(path))?;
    let headers = reader.headers().map_err(csv_error(path))?.clone();
    let found = columns(
        &headers,
        &[
            &["stimulus_id", "stimulus"],
            &["subject_id", "subject"],
            &["raw_score", "score"],
            &["session_id", "session"],
        ],
    );
    let idx = require(path, &found[..3], &["stimulus_id", "subject_id", "raw_score"])?;
    let mut ratings = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error(path))?;
        ratings.push(Rating {
            stimulus: field(&record, idx[0]).to_string(),
            subject: field(&record, idx[1]).to_string(),
            session: found[3]
                .map(|i| field(&record, i).to_string())
                .filter(|s| !s.is_empty()),
            score: number(path, &record, idx[2], "raw_score")?,
        });
    }
    Ok(SubjectiveDataset { ratings })
}

/// Reads objective scores: columns `stimulus_id`, `metric_id`, `value`.
/// Metric ids naming a built-in metric are canonicalized.
pub fn read_scores(path: &Path) -> Result<Vec<MetricSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error(path))?;
    let headers = reader.headers().map_err(csv_error(path))?.clone();
    let found = columns(
        &headers,
        &[
            &["stimulus_id", "stimulus"],
            &["metric_id", "metric"],
            &["value", "score"],
        ],
    );
    let idx = require(path, &found, &["stimulus_id", "metric_id", "value"])?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error(path))?;
        let metric = field(&record, idx[1]);
        let metric = metric
            .parse::<MetricId>()
            .map_or_else(|_| metric.to_string(), |m| m.as_str().to_string());
        samples.push(MetricSample {
            stimulus: field(&record, idx[0]).to_string(),
            metric,
            value: number(path, &record, idx[2], "value")?,
        });
    }
    Ok(samples)
}

/// Reads a manifest written by the distort command, or a bare JSON array
/// of `{id, content, distortion}` objects.
pub fn read_manifest(path: &Path) -> Result<Vec<Stimulus>> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let json_err = |source| Error::Json {
        path: path.to_path_buf(),
        source,
    };
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(json_err);
    }
    let manifest: Manifest = serde_json::from_str(&text).map_err(json_err)?;
    Ok(manifest.entries.iter().map(|e| e.stimulus()).collect())
}

/// Everything written to `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub config_digest: String,
    pub result: EvalResult,
}

pub fn evaluate(
    ratings: &SubjectiveDataset,
    scores: &[MetricSample],
    manifest: Option<&[Stimulus]>,
    config: &BenchConfig,
) -> Result<BenchReport> {
    let result = run_benchmark(ratings, scores, manifest, config)?;
    Ok(BenchReport {
        config: *config,
        config_digest: config_digest(config),
        result,
    })
}

/// Column label for a metric, using conventional notation for built-ins.
pub fn display_name(metric: &str) -> String {
    match metric.parse::<MetricId>() {
        Ok(MetricId::P2poMse) => "PSNR_p2po,M",
        Ok(MetricId::P2poHausdorff) => "PSNR_p2po,H",
        Ok(MetricId::P2plMse) => "PSNR_p2pl,M",
        Ok(MetricId::P2plHausdorff) => "PSNR_p2pl,H",
        Ok(MetricId::PsnrY) => "PSNR_Y",
        Ok(MetricId::PsnrP) => "PSNR_p",
        Ok(MetricId::SsimP) => "SSIM_p",
        Ok(MetricId::MsssimP) => "MS-SSIM_p",
        Ok(MetricId::IwssimP) => "IW-SSIM_p",
        Err(_) => return metric.to_string(),
    }
    .to_string()
}

#[derive(Clone, Copy)]
enum Criterion {
    Plcc,
    Srcc,
    Rmse,
}

impl Criterion {
    fn title(self) -> &'static str {
        match self {
            Criterion::Plcc => "PLCC",
            Criterion::Srcc => "SRCC",
            Criterion::Rmse => "RMSE",
        }
    }

    fn cell(self, c: Option<&Correlations>) -> String {
        match (self, c) {
            (_, None) => "n/a".into(),
            (Criterion::Plcc, Some(c)) => format!("{:.4}", c.plcc),
            (Criterion::Srcc, Some(c)) => format!("{:.4}", c.srcc),
            (Criterion::Rmse, Some(c)) => format!("{:.2}", c.rmse),
        }
    }
}

fn table_row(cells: impl IntoIterator<Item = String>) -> String {
    let mut row = String::from("|");
    for c in cells {
        row.push(' ');
        row.push_str(&c);
        row.push_str(" |");
    }
    row.push('\n');
    row
}

/// Markdown report: one table per criterion with content rows, distortion
/// rows and an `All` row, followed by the significance matrix.
pub fn render_markdown(report: &BenchReport) -> String {
    let r = &report.result;
    let names: Vec<String> = r.metrics.iter().map(|m| display_name(&m.metric)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "# Benchmark report\n");
    let _ = writeln!(
        out,
        "{} stimuli, {} metrics, config digest `{}`.\n",
        r.stimuli.len(),
        r.metrics.len(),
        report.config_digest
    );
    let mut subsets: Vec<(SubsetKind, String)> = Vec::new();
    if let Some(first) = r.metrics.first() {
        for kind in [SubsetKind::Content, SubsetKind::Distortion] {
            subsets.extend(
                first
                    .subsets
                    .iter()
                    .filter(|s| s.kind == kind)
                    .map(|s| (kind, s.name.clone())),
            );
        }
    }
    for criterion in [Criterion::Plcc, Criterion::Srcc, Criterion::Rmse] {
        let _ = writeln!(out, "## {}\n", criterion.title());
        out.push_str(&table_row(
            std::iter::once("Subset".to_string()).chain(names.iter().cloned()),
        ));
        out.push_str(&table_row(std::iter::repeat_n("---".to_string(), names.len() + 1)));
        for (kind, name) in &subsets {
            let cells = r.metrics.iter().map(|m| {
                let s = m.subsets.iter().find(|s| s.kind == *kind && &s.name == name);
                criterion.cell(s.and_then(|s| s.correlations.as_ref()))
            });
            out.push_str(&table_row(std::iter::once(name.clone()).chain(cells)));
        }
        let all = r
            .metrics
            .iter()
            .map(|m| format!("**{}**", criterion.cell(Some(&m.overall))));
        out.push_str(&table_row(std::iter::once("**All**".to_string()).chain(all)));
        out.push('\n');
    }
    let _ = writeln!(out, "## Statistical significance\n");
    match &r.significance {
        Some(sig) => {
            let _ = writeln!(
                out,
                "Two-sided F-test on residual variances, {:.0}% confidence, critical ratio {:.4}. \
                 `1`: row model significantly better than column model; `0`: worse; `-`: indistinguishable.\n",
                sig.confidence * 100.0,
                sig.critical_ratio
            );
            out.push_str(&table_row(std::iter::once(String::new()).chain(names.iter().cloned())));
            out.push_str(&table_row(std::iter::repeat_n("---".to_string(), names.len() + 1)));
            for (name, row) in names.iter().zip(&sig.entries) {
                out.push_str(&table_row(
                    std::iter::once(name.clone()).chain(row.iter().map(|s| s.symbol().to_string())),
                ));
            }
        }
        None => {
            let _ = writeln!(
                out,
                "Not computed: {} stimuli, the variance-ratio test needs at least {}.",
                r.stimuli.len(),
                pcqa_core::bench::MIN_SIGNIFICANCE_SAMPLES
            );
        }
    }
    out
}

/// Long-format summary: `metric,subset_kind,subset,count,plcc,srcc,rmse`.
pub fn render_summary_csv(report: &BenchReport) -> String {
    let mut out = String::from("metric,subset_kind,subset,count,plcc,srcc,rmse\n");
    let cell = |c: Option<&Correlations>| match c {
        Some(c) => format!("{},{},{}", c.plcc, c.srcc, c.rmse),
        None => ",,".into(),
    };
    for m in &report.result.metrics {
        let _ = writeln!(
            out,
            "{},all,all,{},{}",
            m.metric,
            m.objective.len(),
            cell(Some(&m.overall))
        );
        for s in &m.subsets {
            let kind = match s.kind {
                SubsetKind::Content => "content",
                SubsetKind::Distortion => "distortion",
            };
            let _ = writeln!(
                out,
                "{},{kind},{},{},{}",
                m.metric,
                s.name,
                s.count,
                cell(s.correlations.as_ref())
            );
        }
    }
    out
}

/// Per-subject agreement with MOS: `subject,contents,plcc_mean,plcc_std,srcc_mean,srcc_std`.
pub fn render_subjects_csv(report: &BenchReport) -> String {
    let mut out = String::from("subject,contents,plcc_mean,plcc_std,srcc_mean,srcc_std\n");
    for s in &report.result.subjects {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.subject, s.contents, s.plcc_mean, s.plcc_std, s.srcc_mean, s.srcc_std
        );
    }
    out
}

/// Writes `report.json`, `report.md`, `summary.csv` and `subjects.csv`.
pub fn write_reports(report: &BenchReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let files: BTreeMap<&str, String> = BTreeMap::from([
        (
            REPORT_JSON,
            serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ),
        (REPORT_MARKDOWN, render_markdown(report)),
        (SUMMARY_CSV, render_summary_csv(report)),
        (SUBJECTS_CSV, render_subjects_csv(report)),
    ]);
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content).map_err(io_error(&path))?;
    }
    Ok(())
}
