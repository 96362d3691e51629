use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const RF_200: [&str; 6] = ["--set", "rf.left=150", "--set", "rf.peak=200", "--set", "rf.right=250"];

fn dptrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dptrack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = dptrack(args);
    assert!(
        out.status.success(),
        "dptrack {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn synth_single_blob(dir: &Path) -> String {
    let scene = dir.join("blob");
    ok(&["synth", "--scenario", "single-blob", "--out", scene.to_str().unwrap()]);
    scene.to_str().unwrap().to_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn missing_input_dir_fails_with_message() {
    let out = dptrack(&["track", "--input", "/definitely/not/here"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/definitely/not/here"), "{err}");
}

#[test]
fn synth_writes_frames_and_ground_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = synth_single_blob(tmp.path());
    let frames = fs::read_dir(&scene)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "pgm"))
        .count();
    assert_eq!(frames, 16);
    let gt = fs::read_to_string(Path::new(&scene).join("gt.csv")).unwrap();
    assert!(gt.starts_with("frame,row,col\n0,14,46\n"), "{gt}");
    assert_eq!(gt.lines().count(), 17);
}

#[test]
fn synth_reads_scene_json() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "scene.json",
        r#"{"width": 12, "height": 10, "background": 0,
            "blobs": [{"radius": 1, "intensity": 255, "trajectory": [[2, 2], [3, 4], [5, 6]]}]}"#,
    );
    let out = tmp.path().join("s");
    ok(&["synth", "--spec", &spec, "--out", out.to_str().unwrap()]);
    let gt = fs::read_to_string(out.join("gt.csv")).unwrap();
    assert_eq!(gt, "frame,row,col\n0,2,2\n1,3,4\n2,5,6\n");

    let bad = write(tmp.path(), "bad.json", r#"{"width": 4}"#);
    assert!(!dptrack(&["synth", "--spec", &bad, "--out", out.to_str().unwrap()]).status.success());
}

#[test]
fn track_single_blob_matches_ground_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = synth_single_blob(tmp.path());
    let path_csv = tmp.path().join("path.csv");
    let mut args = vec!["track", "--input", &scene, "--method", "dp-rf", "--out", path_csv.to_str().unwrap()];
    args.extend(RF_200);
    ok(&args);

    let csv = fs::read_to_string(&path_csv).unwrap();
    assert!(csv.contains("# method = \"dp-rf\""), "{csv}");
    assert!(csv.contains("# rf.peak = 200"));
    assert!(csv.contains("# traceback = seeded"));
    assert_eq!(data_rows(&csv).len(), 16);

    let gt = format!("{scene}/gt.csv");
    let report: Value =
        serde_json::from_str(&ok(&["eval", "--path", path_csv.to_str().unwrap(), "--gt", &gt, "--thresholds", "5"]))
            .unwrap();
    assert_eq!(report["ter"]["5"], 0.0);
}

#[test]
fn seed_flag_starts_traceback_at_given_pixel() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = synth_single_blob(tmp.path());
    let csv = ok(&["track", "--input", &scene, "--method", "dp-rf", "--seed", "42,8"]);
    assert!(csv.contains("# seed = 42,8"), "{csv}");
    let rows = data_rows(&csv);
    let last = rows.last().unwrap();
    assert_eq!((last[0].as_str(), last[1].as_str(), last[2].as_str()), ("15", "42", "8"));

    let out = dptrack(&["track", "--input", &scene, "--seed", "99,99"]);
    assert!(!out.status.success());
}

#[test]
fn baseline_and_overlay() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = synth_single_blob(tmp.path());
    let overlay = tmp.path().join("ov");
    let csv = ok(&[
        "track",
        "--input",
        &scene,
        "--method",
        "baseline-bbox",
        "--overlay",
        overlay.to_str().unwrap(),
    ]);
    assert!(!csv.contains("# traceback"));
    assert_eq!(data_rows(&csv).len(), 16);
    assert_eq!(fs::read_dir(&overlay).unwrap().count(), 16);
}

#[test]
fn eval_identical_csvs_is_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = write(tmp.path(), "gt.csv", "frame,row,col\n0,1,1\n1,2,3\n2,5,5\n");
    let out = ok(&["eval", "--path", &gt, "--gt", &gt, "--thresholds", "15,20"]);
    assert_eq!(out, "{\"ter\":{\"15\":0.0,\"20\":0.0},\"atd\":0.0,\"per_frame\":[0.0,0.0,0.0]}\n");
}

#[test]
fn eval_reports_distances_keyed_by_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = write(tmp.path(), "gt.csv", "frame,row,col\n0,0,0\n1,0,0\n2,0,0\n3,0,0\n");
    let path = write(tmp.path(), "p.csv", "frame,row,col,score\n0,0,0,1\n1,3,0,1\n2,0,20,1\n3,15,20,1\n");
    let report: Value = serde_json::from_str(&ok(&["eval", "--path", &path, "--gt", &gt])).unwrap();
    assert_eq!(report["ter"]["15"], 0.5);
    assert_eq!(report["ter"]["20"], 0.5);
    assert_eq!(report["atd"], 12.0);
    assert_eq!(report["per_frame"], serde_json::json!([0.0, 3.0, 20.0, 25.0]));
    let keys: Vec<&String> = report["ter"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["15", "20"]);
}

#[test]
fn eval_length_mismatch_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = write(tmp.path(), "gt.csv", "frame,row,col\n0,0,0\n1,0,0\n");
    let path = write(tmp.path(), "p.csv", "frame,row,col\n0,0,0\n1,0,0\n2,0,0\n");
    let out = dptrack(&["eval", "--path", &path, "--gt", &gt]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn compare_single_blob_json() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = synth_single_blob(tmp.path());
    let gt = format!("{scene}/gt.csv");
    let mut args = vec!["compare", "--input", &scene, "--gt", &gt, "--thresholds", "5", "--json"];
    args.extend(RF_200);
    let report: Value = serde_json::from_str(&ok(&args)).unwrap();
    assert_eq!(report["dp"]["report"]["ter"]["5"], 0.0);
    assert_eq!(report["dp-rf"]["report"]["ter"]["5"], 0.0);
    assert_eq!(report["delta"]["ter"]["5"], 0.0);
    assert_eq!(report["config"]["rf"]["peak"], 200);

    args.retain(|a| *a != "--json");
    let text = ok(&args);
    assert!(text.contains("dp-rf"));
    assert!(text.contains("TER@5"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = synth_single_blob(tmp.path());
    let cfg = write(tmp.path(), "run.conf", "dp.radius_j = 4\ndp.bogus = 1\n");
    let out = dptrack(&["track", "--input", &scene, "--config", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}
