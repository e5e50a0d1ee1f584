//! `pcqa`: score, distort, snapshot and benchmark colored point clouds.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use pcqa::config::{config_digest, JobConfig};
use pcqa::core::cloud::normalize_points;
use pcqa::core::metrics::MetricId;
use pcqa::core::project::{Canvas, Projector};
use pcqa::distort::{generate, read_spec, MANIFEST_FILE};
use pcqa::ply::{load_ply, load_ply_raw, save_ply, PlyFormat};
use pcqa::score::score_pairs;
use pcqa::snapshot::{export_snapshots, write_viewpoints_csv};
use pcqa::{bench, Error};

#[derive(Parser)]
#[command(
    name = "pcqa",
    version,
    about = "Full-reference quality assessment for colored point clouds"
)]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "PCQA_JOBS")]
    jobs: Option<usize>,
    /// JSON job configuration; its fields override command-line flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ProjectionFlags {
    /// Icosphere subdivision level of the viewpoint set (0 gives 12 views)
    #[arg(long = "views")]
    view_level: Option<u32>,
    /// Projection scale factor
    #[arg(long)]
    scale: Option<f64>,
    /// Canvas size: `auto` or `WxH`
    #[arg(long, value_parser = parse_canvas)]
    canvas: Option<Canvas>,
}

#[derive(Subcommand)]
enum Command {
    /// Score distorted clouds against a reference
    Score {
        reference: PathBuf,
        #[arg(required = true)]
        distorted: Vec<PathBuf>,
        /// Metrics, comma separated (e.g. iwssim_p,msssim_p,psnr_y) or `all`
        #[arg(long, value_delimiter = ',')]
        metric: Vec<String>,
        #[command(flatten)]
        projection: ProjectionFlags,
        /// Write IW-SSIM weight and similarity maps of every view
        #[arg(long, num_args = 0..=1, default_missing_value = "debug_maps", value_name = "DIR")]
        debug_maps: Option<PathBuf>,
        /// JSON output file (default: standard output)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate distorted clouds from a spec file
    Distort {
        input: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed for Gaussian lines without an explicit seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_format)]
        format: Option<PlyFormat>,
    },
    /// Export per-view PNG snapshots, occupancy masks and the viewpoint table
    Snapshot {
        cloud: PathBuf,
        /// Reference whose centroid and canvas are used (default: the cloud itself)
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        projection: ProjectionFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate objective scores against subjective ratings
    Bench {
        /// Score CSV files with columns stimulus_id,metric_id,value
        #[arg(long, required = true, num_args = 1..)]
        scores: Vec<PathBuf>,
        /// Rating CSV with columns stimulus_id,subject_id,raw_score[,session_id]
        #[arg(long)]
        mos: PathBuf,
        /// Manifest(s) assigning stimuli to contents and distortion types
        #[arg(long, num_args = 1..)]
        manifest: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map a cloud onto the integer grid with the longest axis spanning [0, steps]
    Normalize {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: u32,
        #[arg(long, value_parser = parse_format)]
        format: Option<PlyFormat>,
    },
}

fn parse_canvas(s: &str) -> Result<Canvas, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Canvas::Auto);
    }
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected `auto` or WxH, got '{s}'"))?;
    let dim = |v: &str| {
        v.trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("invalid canvas size '{s}'"))
    };
    Ok(Canvas::Fixed {
        width: dim(w)?,
        height: dim(h)?,
    })
}

fn parse_format(s: &str) -> Result<PlyFormat, String> {
    match s {
        "ascii" => Ok(PlyFormat::Ascii),
        "binary" | "binary_le" | "binary_little_endian" => Ok(PlyFormat::BinaryLittleEndian),
        _ => Err(format!("unknown PLY format '{s}' (ascii | binary_le)")),
    }
}

fn parse_metrics(list: &[String]) -> anyhow::Result<Option<Vec<MetricId>>> {
    if list.is_empty() {
        return Ok(None);
    }
    if list.len() == 1 && list[0].eq_ignore_ascii_case("all") {
        return Ok(Some(MetricId::ALL.to_vec()));
    }
    let mut out = Vec::new();
    for m in list.iter().filter(|m| !m.trim().is_empty()) {
        let id: MetricId = m.trim().parse()?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(Some(out))
}

fn apply_projection(cfg: &mut JobConfig, flags: &ProjectionFlags) {
    let p = &mut cfg.metric.projection;
    if let Some(l) = flags.view_level {
        p.view_level = l;
    }
    if let Some(s) = flags.scale {
        p.scale = s;
    }
    if let Some(c) = flags.canvas {
        p.canvas = c;
    }
}

/// Flags over defaults, then the config file over both.
fn finish_config(cfg: JobConfig, file: Option<&Path>) -> anyhow::Result<JobConfig> {
    match file {
        Some(path) => Ok(cfg.overlaid_with_file(path)?),
        None => Ok(cfg),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    let mut cfg = JobConfig::default();
    let config_file = cli.config.as_deref();
    match cli.command {
        Command::Score {
            reference,
            distorted,
            metric,
            projection,
            debug_maps,
            out,
        } => {
            cfg.command = Some("score".into());
            cfg.inputs = std::iter::once(reference).chain(distorted).collect();
            if let Some(m) = parse_metrics(&metric)? {
                cfg.metrics = m;
            }
            apply_projection(&mut cfg, &projection);
            cfg.output = out;
            let cfg = finish_config(cfg, config_file)?;
            if cfg.inputs.len() < 2 {
                bail!("score needs a reference and at least one distorted cloud");
            }
            if cfg.metrics.is_empty() {
                bail!("no metric selected");
            }
            let reference = load_ply(&cfg.inputs[0])?;
            let distorted = cfg.inputs[1..]
                .iter()
                .map(load_ply)
                .collect::<Result<Vec<_>, Error>>()?;
            let pairs: Vec<_> = distorted.iter().map(|d| (&reference, d)).collect();
            let records = score_pairs(&pairs, &cfg.metrics, &cfg.metric, debug_maps.as_deref())?;
            let json = serde_json::to_string_pretty(&records)? + "\n";
            match &cfg.output {
                Some(path) => {
                    std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
                    for r in &records {
                        println!("{}\t{}\t{}\t{:.6}", r.reference, r.distorted, r.metric, r.value);
                    }
                }
                None => print!("{json}"),
            }
        }
        Command::Distort {
            input,
            spec,
            out,
            seed,
            format,
        } => {
            cfg.command = Some("distort".into());
            cfg.inputs = vec![input];
            cfg.output = Some(out);
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(f) = format {
                cfg.ply_format = f;
            }
            let mut cfg = finish_config(cfg, config_file)?;
            let specs = read_spec(&spec, cfg.seed)?;
            cfg.distortions.extend(specs);
            let input = cfg.inputs.first().context("distort needs an input cloud")?;
            let out = cfg.output.clone().context("distort needs --out")?;
            if cfg.distortions.is_empty() {
                eprintln!("warning: {} lists no distortions; nothing written", spec.display());
                return Ok(());
            }
            let cloud = load_ply(input)?;
            let manifest = generate(&cloud, input, &cfg.distortions, &out, cfg.ply_format)?;
            manifest.write(&out.join(MANIFEST_FILE))?;
            for e in &manifest.entries {
                println!("{}\t{} points", e.file.display(), e.points.unwrap_or(0));
            }
        }
        Command::Snapshot {
            cloud,
            reference,
            projection,
            out,
        } => {
            cfg.command = Some("snapshot".into());
            cfg.inputs = std::iter::once(cloud).chain(reference).collect();
            apply_projection(&mut cfg, &projection);
            cfg.output = Some(out);
            let cfg = finish_config(cfg, config_file)?;
            let out = cfg.output.clone().context("snapshot needs --out")?;
            let cloud = load_ply(&cfg.inputs[0])?;
            let reference = match cfg.inputs.get(1) {
                Some(path) => load_ply(path)?,
                None => cloud.clone(),
            };
            let projector = Projector::for_pair(&reference, &cloud, &cfg.metric.projection, 0)?;
            let views = cfg.metric.projection.viewpoints()?;
            let files = export_snapshots(&cloud, &projector, &views, &out)?;
            write_viewpoints_csv(&out.join("viewpoints.csv"), &views)?;
            println!(
                "{} views, {}x{} canvas, {} files in {} (config digest {})",
                views.len(),
                projector.width,
                projector.height,
                files.len() + 1,
                out.display(),
                config_digest(&cfg.metric.projection)
            );
        }
        Command::Bench {
            scores,
            mos,
            manifest,
            out,
        } => {
            cfg.command = Some("bench".into());
            cfg.output = Some(out);
            let cfg = finish_config(cfg, config_file)?;
            let out = cfg.output.clone().context("bench needs --out")?;
            let ratings = bench::read_ratings(&mos)?;
            let mut samples = Vec::new();
            for path in &scores {
                samples.extend(bench::read_scores(path)?);
            }
            let stimuli = if manifest.is_empty() {
                None
            } else {
                let mut all = Vec::new();
                for path in &manifest {
                    all.extend(bench::read_manifest(path)?);
                }
                Some(all)
            };
            let report = bench::evaluate(&ratings, &samples, stimuli.as_deref(), &cfg.bench)?;
            bench::write_reports(&report, &out)?;
            for m in &report.result.metrics {
                println!(
                    "{}\tPLCC {:.4}\tSRCC {:.4}\tRMSE {:.4}",
                    m.metric, m.overall.plcc, m.overall.srcc, m.overall.rmse
                );
            }
        }
        Command::Normalize {
            input,
            output,
            steps,
            format,
        } => {
            cfg.command = Some("normalize".into());
            if let Some(f) = format {
                cfg.ply_format = f;
            }
            let cfg = finish_config(cfg, config_file)?;
            let raw = load_ply_raw(&input)?;
            let name = input
                .file_stem()
                .map_or_else(|| "cloud".into(), |s| s.to_string_lossy().into_owned());
            let cloud = normalize_points(&name, &raw, steps).map_err(Error::from)?;
            save_ply(&cloud, &output, cfg.ply_format)?;
            println!(
                "{} points ({} duplicates removed)",
                cloud.len(),
                raw.len() - cloud.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
