use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gw_core::PipelineConfig;
use tempfile::TempDir;

fn gw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gw"))
        .args(args)
        .env_remove("GW_CONFIG")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SCENE: &str = "\
width = 96
height = 72
nframes = 30
seed = 3
background = 120,120,120
object.red.color = 230,30,30
object.red.size = 16x12
object.red.start = 4,4
object.red.velocity = 1,0
object.red.appear = 15
person.clerk.box = 60,40,30,30
";

const CONFIG: &str = "\
# short warmup for a short clip
warmup_frames = 15
";

fn synth_scene(dir: &Path) -> Output {
    fs::write(dir.join("scene.txt"), SCENE).unwrap();
    gw(&[
        "synth",
        "--scene", p(&dir.join("scene.txt")),
        "--out-frames", p(&dir.join("frames")),
        "--out-gt", p(&dir.join("gt.jsonl")),
        "--out-persons", p(&dir.join("persons.jsonl")),
        "--out-stream", p(&dir.join("clip.gwvs1")),
    ])
}

#[test]
fn synth_writes_every_output() {
    let dir = TempDir::new().unwrap();
    let out = synth_scene(dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(dir.path().join("frames")).unwrap().count(), 30);
    assert_eq!(fs::read_to_string(dir.path().join("gt.jsonl")).unwrap().lines().count(), 30);
    assert_eq!(fs::read_to_string(dir.path().join("persons.jsonl")).unwrap().lines().count(), 30);
    assert!(dir.path().join("clip.gwvs1").is_file());
}

#[test]
fn synth_rejects_escaping_object() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("scene.txt"), "width = 40\nheight = 40\nnframes = 50\nobject.runaway.color = 1,2,3\nobject.runaway.size = 10x10\nobject.runaway.velocity = 1,0\n").unwrap();
    let out = gw(&["synth", "--scene", p(&dir.path().join("scene.txt")), "--out-frames", p(&dir.path().join("f")), "--out-gt", p(&dir.path().join("gt.jsonl"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("runaway"));
}

#[test]
fn detect_writes_detections_manifest_and_overlay() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert!(synth_scene(d).status.success());
    fs::write(d.join("gw.conf"), CONFIG).unwrap();
    let out = gw(&[
        "detect",
        "--frames", p(&d.join("frames")),
        "--config", p(&d.join("gw.conf")),
        "--out", p(&d.join("det.jsonl")),
        "--overlay", p(&d.join("overlay")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let det = fs::read_to_string(d.join("det.jsonl")).unwrap();
    assert!(det.contains("\"color\":\"Red\""), "{det}");
    assert_eq!(fs::read_dir(d.join("overlay")).unwrap().count(), 30);

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("det.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["frames_processed"], 30);
    let snapshot = PipelineConfig::parse(manifest["config"].as_str().unwrap()).unwrap();
    assert_eq!(snapshot, PipelineConfig::parse(CONFIG).unwrap());

    // the stream file gives the same detections
    let out = gw(&["detect", "--frames", p(&d.join("clip.gwvs1")), "--config", p(&d.join("gw.conf")), "--out", p(&d.join("det2.jsonl"))]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(d.join("det2.jsonl")).unwrap(), det);
}

#[test]
fn config_path_from_environment() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert!(synth_scene(d).status.success());
    fs::write(d.join("gw.conf"), "warmup_frames = 5\nse_size = 4\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gw"))
        .args(["detect", "--frames", p(&d.join("frames")), "--out", p(&d.join("det.jsonl"))])
        .env("GW_CONFIG", d.join("gw.conf"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn detect_exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = gw(&["detect", "--frames", p(&d.join("nowhere")), "--out", p(&d.join("det.jsonl"))]);
    assert_eq!(out.status.code(), Some(1));

    assert!(synth_scene(d).status.success());
    fs::write(d.join("bad.conf"), "containment_min = 3\n").unwrap();
    let out = gw(&["detect", "--frames", p(&d.join("frames")), "--config", p(&d.join("bad.conf")), "--out", p(&d.join("det.jsonl"))]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(d.join("persons.jsonl"), "{\"frame\":0,\"persons\":[{\"x\":0,\"y\":0,\"w\":0,\"h\":4}]}\n").unwrap();
    let out = gw(&["detect", "--frames", p(&d.join("frames")), "--persons", p(&d.join("persons.jsonl")), "--out", p(&d.join("det.jsonl"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_and_curve_on_identical_files() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert!(synth_scene(d).status.success());
    let gt = p(&d.join("gt.jsonl")).to_string();
    let out = gw(&["eval", "--det", &gt, "--gt", &gt]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(values[3..5], ["1.0", "1.0"]);

    let out = gw(&["curve", "--det", &gt, "--gt", &gt, "--out", p(&d.join("curve.csv"))]);
    assert!(out.status.success());
    let csv = fs::read_to_string(d.join("curve.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 20);
    assert_eq!(lines[0], "tau,precision,recall");
    assert!(lines[1..].iter().all(|l| l.ends_with(",1.0,1.0")));
}

#[test]
fn eval_with_no_detections() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("gt.jsonl"), "{\"frame\":0,\"boxes\":[{\"x\":1,\"y\":1,\"w\":4,\"h\":4}]}\n").unwrap();
    fs::write(d.join("det.jsonl"), "").unwrap();
    let out = gw(&["eval", "--det", p(&d.join("det.jsonl")), "--gt", p(&d.join("gt.jsonl"))]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().nth(1).unwrap(), "0,0,1,0.0,0.0,0.0");

    fs::write(d.join("det.jsonl"), "{\"frame\":0,\"boxes\":[\n").unwrap();
    let out = gw(&["eval", "--det", p(&d.join("det.jsonl")), "--gt", p(&d.join("gt.jsonl"))]);
    assert_eq!(out.status.code(), Some(1));
}
