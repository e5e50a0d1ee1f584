//! End-to-end runs of the `pcqa` binary.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pcqa::bench::REPORT_MARKDOWN;
use pcqa::core::iqa2d::PSNR_CAP;
use pcqa::distort::{Manifest, MANIFEST_FILE};
use pcqa::ply::{save_ply, PlyFormat};
use pcqa::score::ScoreRecord;
use serde_json::Value;

fn pcqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcqa"))
        .args(args)
        .env_remove("PCQA_JOBS")
        .output()
        .expect("pcqa binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_sphere(dir: &Path) -> PathBuf {
    let path = dir.join("sphere.ply");
    save_ply(&common::sphere(24), &path, PlyFormat::BinaryLittleEndian).unwrap();
    path
}

#[test]
fn self_score_reaches_every_maximum() {
    let dir = tempfile::tempdir().unwrap();
    let ply = write_sphere(dir.path());
    let out_json = dir.path().join("scores.json");
    let out = pcqa(&[
        "score",
        s(&ply),
        s(&ply),
        "--metric",
        "all",
        "--views",
        "0",
        "--out",
        s(&out_json),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let records: Vec<ScoreRecord> = serde_json::from_str(&fs::read_to_string(&out_json).unwrap()).unwrap();
    assert_eq!(records.len(), 9);
    for r in &records {
        let best = match r.metric.projection_kind() {
            Some(pcqa::core::metrics::ProjectionKind::Psnr) | None => PSNR_CAP,
            Some(_) => 1.0,
        };
        assert!((r.value - best).abs() < 1e-9, "{} = {}", r.metric, r.value);
        if r.metric.projection_kind().is_some() {
            assert_eq!(r.per_view.len(), 12);
        }
        assert_eq!(r.config_digest.len(), 64);
    }
}

#[test]
fn view_level_zero_gives_twelve_values_and_flags_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ply = write_sphere(dir.path());
    let noisy = dir.path().join("noisy.ply");
    let cloud = pcqa::core::distort::gaussian_noise(&common::sphere(24), 1.0, 12.0, 3).unwrap();
    save_ply(&cloud, &noisy, PlyFormat::Ascii).unwrap();
    let out = pcqa(&[
        "score",
        s(&ply),
        s(&noisy),
        "--metric",
        "iwssim_p",
        "--views",
        "0",
        "--canvas",
        "200x180",
        "--jobs",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let records: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["per_view"].as_array().unwrap().len(), 12);
    let v = records[0]["value"].as_f64().unwrap();
    assert!(v > 0.0 && v < 1.0, "{v}");

    // the config file wins over the flags
    let config = dir.path().join("job.json");
    fs::write(&config, r#"{"metric": {"projection": {"view_level": 1}}}"#).unwrap();
    let out = pcqa(&[
        "score",
        s(&ply),
        s(&noisy),
        "--metric",
        "psnr_p",
        "--views",
        "0",
        "--config",
        s(&config),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let records: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(records[0]["per_view"].as_array().unwrap().len(), 42);
}

#[test]
fn missing_input_exits_one_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let ply = write_sphere(dir.path());
    let missing = dir.path().join("nowhere.ply");
    let out = pcqa(&["score", s(&ply), s(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nowhere.ply"), "{}", stderr(&out));

    let out = pcqa(&["score", s(&ply), s(&ply), "--canvas", "12by4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn distort_writes_one_cloud_per_level_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let ply = write_sphere(dir.path());
    let spec = dir.path().join("levels.txt");
    fs::write(
        &spec,
        "# octree levels\ndownsample 7\ndownsample 8\ndownsample 9\ngaussian 2 16\n",
    )
    .unwrap();
    let run = |out: &Path| {
        let o = pcqa(&["distort", s(&ply), "--spec", s(&spec), "--out", s(out), "--seed", "11"]);
        assert!(o.status.success(), "{}", stderr(&o));
        Manifest::read(&out.join(MANIFEST_FILE)).unwrap()
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let manifest = run(&a);
    run(&b);
    let ids: Vec<&str> = manifest.entries.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["sphere_ds7", "sphere_ds8", "sphere_ds9", "sphere_gn_g2_c16_s11"]);
    for e in &manifest.entries {
        let name = e.file.file_name().unwrap();
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        assert!(e.sha256.is_some());
    }
    assert_eq!(
        fs::read(a.join(MANIFEST_FILE)).unwrap().len(),
        fs::read(b.join(MANIFEST_FILE)).unwrap().len()
    );
}

#[test]
fn distort_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let ply = write_sphere(dir.path());
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "# nothing yet\n\n").unwrap();
    let out_dir = dir.path().join("none");
    let out = pcqa(&["distort", s(&ply), "--spec", s(&empty), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"));
    assert!(!out_dir.join(MANIFEST_FILE).exists());

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "downsample 7\nblur 3\n").unwrap();
    let out = pcqa(&["distort", s(&ply), "--spec", s(&bad), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn snapshot_writes_views_masks_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let ply = write_sphere(dir.path());
    let out_dir = dir.path().join("shots");
    let out = pcqa(&["snapshot", s(&ply), "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = fs::read_to_string(out_dir.join("viewpoints.csv")).unwrap();
    assert_eq!(table.lines().count(), 13);
    assert!(table.starts_with("index,nx,ny,nz"));
    for i in 0..12 {
        assert!(out_dir.join(format!("sphere_{i}.png")).is_file());
        assert!(out_dir.join(format!("sphere_{i}_mask.png")).is_file());
    }
}

fn write_perfect_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let ratings = dir.join("ratings.csv");
    let scores = dir.join("scores.csv");
    let mut r = String::from("stimulus_id,subject_id,raw_score\n");
    let mut sc = String::from("stimulus_id,metric_id,value\n");
    for i in 0..20 {
        let quality = 10.0 + 4.0 * i as f64;
        for subject in 0..6 {
            r += &format!("st{i:02},sub{subject},{}\n", quality + subject as f64);
        }
        sc += &format!("st{i:02},oracle,{}\n", quality / 100.0);
    }
    fs::write(&ratings, r).unwrap();
    fs::write(&scores, sc).unwrap();
    (ratings, scores)
}

#[test]
fn bench_perfect_metric_reports_unit_plcc() {
    let dir = tempfile::tempdir().unwrap();
    let (ratings, scores) = write_perfect_fixture(dir.path());
    let out_dir = dir.path().join("report");
    let out = pcqa(&[
        "bench",
        "--scores",
        s(&scores),
        "--mos",
        s(&ratings),
        "--out",
        s(&out_dir),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    let overall = &report["result"]["metrics"][0]["overall"];
    assert!((overall["plcc"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((overall["srcc"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(report["config_digest"].as_str().unwrap().len(), 64);
    let md = fs::read_to_string(out_dir.join(REPORT_MARKDOWN)).unwrap();
    assert!(md.contains("1.0000"), "{md}");
}

#[test]
fn bench_lists_orphans_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (ratings, scores) = write_perfect_fixture(dir.path());
    let mut text = fs::read_to_string(&scores).unwrap();
    text += "ghost,oracle,0.5\n";
    fs::write(&scores, text).unwrap();
    let out = pcqa(&[
        "bench",
        "--scores",
        s(&scores),
        "--mos",
        s(&ratings),
        "--out",
        s(&dir.path().join("r")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ghost"), "{}", stderr(&out));
}

#[test]
fn bench_markdown_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture("bench");
    let out = pcqa(&[
        "bench",
        "--scores",
        s(&fx.join("scores.csv")),
        "--mos",
        s(&fx.join("ratings.csv")),
        "--manifest",
        s(&fx.join("manifest.json")),
        "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let got = fs::read_to_string(dir.path().join(REPORT_MARKDOWN)).unwrap();
    let golden = fx.join("report.golden.md");
    if std::env::var_os("PCQA_UPDATE_GOLDEN").is_some() {
        fs::write(&golden, &got).unwrap();
    }
    let want = fs::read_to_string(&golden).expect("golden file exists; set PCQA_UPDATE_GOLDEN=1 to create it");
    assert_eq!(got, want);
}

#[test]
fn normalize_maps_onto_the_unit_grid() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("raw.ply");
    fs::write(
        &input,
        "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n\
         0.5 0.5 0.5 10 20 30\n2.5 0.5 0.5 40 50 60\n2.5 1.5 0.5 70 80 90\n",
    )
    .unwrap();
    let output = dir.path().join("norm.ply");
    let out = pcqa(&["normalize", s(&input), s(&output), "--format", "ascii"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let cloud = pcqa::ply::load_ply(&output).unwrap();
    let xs: Vec<[i32; 3]> = cloud.points.iter().map(|p| p.position).collect();
    assert_eq!(xs, [[0, 0, 0], [1000, 0, 0], [1000, 500, 0]]);
}
