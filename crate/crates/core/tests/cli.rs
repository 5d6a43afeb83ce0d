use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geonorm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/paper_default.json")
}

fn synth(dir: &Path, seed: &str) -> PathBuf {
    let out = dir.join("synth");
    ok(&["--seed", seed, "gen-synth", "--out", p(&out), "--images", "4", "--per-image", "5"]);
    out
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["evaluate", "--gt", "x"]).status.code(), Some(1));
    assert_eq!(run(&["sample", "--mode", "bogus", "--in", "a", "--out", "b"]).status.code(), Some(1));
    assert_eq!(
        run(&["--seed", "-3", "gen-synth", "--out", "x", "--images", "1", "--per-image", "1"]).status.code(),
        Some(1)
    );
}

#[test]
fn missing_input_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope");
    let out = run(&["angle-hist", "--in", p(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
    let out = run(&["--config", p(&missing), "angle-hist", "--in", "."]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"gnm": {"branches": [{"snu": "s", "onu": "o", "feasible": {"scale": [10, 80], "angles": [["-pi/2", "pi/2"]]}}]}}"#,
    )
    .unwrap();
    let out = run(&["--config", p(&cfg), "angle-hist", "--in", "."]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cover"));
    fs::write(&cfg, r#"{"seeed": 1}"#).unwrap();
    let out = run(&["--config", p(&cfg), "angle-hist", "--in", "."]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seeed"));
}

#[test]
fn shipped_config_loads() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), "1");
    let out = ok(&["--config", p(&config_path()), "angle-hist", "--in", p(&data), "--bins", "4"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let total: usize = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 20);
}

#[test]
fn simulate_then_evaluate_is_perfect_with_default_detector() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), "2");
    let det = tmp.path().join("det");
    ok(&["--seed", "2", "simulate", "--in", p(&data), "--out", p(&det)]);
    assert_eq!(fs::read_dir(&det).unwrap().count(), 4);
    let out = ok(&["evaluate", "--gt", p(&data), "--det", p(&det), "--iou", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["counts"]["n_gt"], 20);
    assert_eq!(v["recall"], 1.0);
    assert_eq!(v["precision"], 1.0);
    let table = ok(&["evaluate", "--gt", p(&data), "--det", p(&det), "--format", "table"]);
    assert!(String::from_utf8(table.stdout).unwrap().contains("f_score"));
}

#[test]
fn transform_roundtrips_through_inverse() {
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("in.txt");
    fs::write(&src, "100,20,180,20,180,60,100,60,a\n10,10,50,10,50,90,10,90,###\n").unwrap();
    let fwd = tmp.path().join("fwd.txt");
    let back = tmp.path().join("back.txt");
    let common = ["--height", "400", "--width", "600"];
    ok(&[&["transform", "--branch", "s1/2,o_r", "--in", p(&src), "--out", p(&fwd)][..], &common].concat());
    ok(&[&["transform", "--branch", "s1/2,o_r", "--in", p(&fwd), "--out", p(&back), "--inverse"][..], &common]
        .concat());
    let fwd_text = fs::read_to_string(&fwd).unwrap();
    // rows become columns: x' = (400 - y) / 2, y' = x / 2
    assert_eq!(fwd_text.lines().next().unwrap(), "170.0,50.0,190.0,50.0,190.0,90.0,170.0,90.0,a");
    assert_eq!(
        fs::read_to_string(&back).unwrap(),
        "100.0,20.0,180.0,20.0,180.0,60.0,100.0,60.0,a\n10.0,10.0,50.0,10.0,50.0,90.0,10.0,90.0,###\n"
    );
    let out = run(&[&["transform", "--branch", "s1/2", "--in", p(&src), "--out", p(&fwd)][..], &common].concat());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sampling_modes_write_corpora() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), "3");
    for mode in ["gss", "gvs", "lgss", "aware"] {
        let out = tmp.path().join(mode);
        ok(&["--seed", "3", "sample", "--mode", mode, "--in", p(&data), "--out", p(&out)]);
        assert!(out.join("manifest.json").exists(), "{mode}");
    }
    // original plus seven copies per image
    let aware = fs::read_dir(tmp.path().join("aware")).unwrap().count();
    assert_eq!(aware, 4 * 8 + 1);
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn seeded_commands_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let base = synth(tmp.path(), "4");
    let mut runs = Vec::new();
    for k in 0..2 {
        let root = tmp.path().join(format!("run{k}"));
        let syn = root.join("syn");
        ok(&["--seed", "9", "gen-synth", "--out", p(&syn), "--images", "3", "--per-image", "4"]);
        let rot = root.join("rot");
        ok(&["--seed", "9", "rotate-benchmark", "--in", p(&base), "--out", p(&rot)]);
        let aware = root.join("aware");
        ok(&["--seed", "9", "sample", "--mode", "aware", "--in", p(&base), "--out", p(&aware)]);
        let det = root.join("det");
        ok(&["--seed", "9", "simulate", "--in", p(&rot), "--out", p(&det)]);
        runs.push([syn, rot, aware, det].map(|d| snapshot(&d)));
    }
    assert_eq!(runs[0], runs[1]);
    let other = tmp.path().join("other");
    ok(&["--seed", "10", "rotate-benchmark", "--in", p(&base), "--out", p(&other)]);
    assert_ne!(snapshot(&other), runs[0][1]);
}
