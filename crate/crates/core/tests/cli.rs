use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algebroid-poisson"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn verify_presets_pass() {
    let dir = tempfile::tempdir().unwrap();
    for model in ["so3", "seqtriple:64"] {
        let out = dir.path().join("r.json");
        let o = run(&[
            "verify",
            model,
            "--draws",
            "10",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let r = read(&out);
        assert_eq!(r["model"], model);
        assert_eq!(r["seed"], 42);
        assert!(r["checks"]
            .as_array()
            .unwrap()
            .iter()
            .all(|c| c["pass"] == true));
    }
}

#[test]
fn verify_model_file_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("model.json");
    fs::write(
        &good,
        r#"{"name": "tiny", "base": {"dim": 2, "norm": "p2"}, "fiber": {"dim": 2, "norm": "pinf"},
            "predual": {"dim": 2, "norm": "p1"}, "anchor": {"diagonal": [1.0, 0.5]}, "structure": "zero"}"#,
    )
    .unwrap();
    let o = run(&["verify", good.to_str().unwrap(), "--draws", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"name": "bad", "base": {"dim": 1, "norm": "p2"}, "fiber": {"dim": 2, "norm": "p2"},
            "predual": {"dim": 2, "norm": "p2"}, "anchor": "zero",
            "structure": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]}"#,
    )
    .unwrap();
    let o = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("validation"));

    assert_eq!(code(&run(&["verify", "no-such-model"])), 2);
}

#[test]
fn failing_tolerance_exits_one() {
    let o = run(&[
        "verify",
        "so3",
        "--draws",
        "3",
        "--tol-overrides",
        "jacobi_functions=-1",
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(
        code(&run(&["verify", "so3", "--tol-overrides", "bogus=1"])),
        2
    );
}

#[test]
fn io_failure_exits_three() {
    let o = run(&[
        "roundtrip",
        "so3",
        "--out",
        "/nonexistent-dir/x/report.json",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn conditions_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(&[
        "conditions",
        "seqtriple",
        "--dims",
        "8..1024",
        "--draws",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&out)["conditions"]["is_poisson_manifold"], true);
    for fam in ["precotangent", "seqtriple:weights=unit"] {
        let o = run(&[
            "conditions",
            fam,
            "--dims",
            "8..1024",
            "--draws",
            "4",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        let r = read(&out);
        assert_eq!(r["conditions"]["is_poisson_manifold"], false);
        assert_eq!(r["conditions"]["anchor_dual_verdict"]["verdict"], "growing");
    }
    assert_eq!(code(&run(&["conditions", "so3"])), 2);
    assert_eq!(
        code(&run(&["conditions", "seqtriple", "--dims", "8,16"])),
        2
    );
}

#[test]
fn flow_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let summary = dir.path().join("s.json");
    let o = run(&[
        "flow",
        "so3",
        "--conserved",
        "casimir",
        "--out",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read(&summary);
    assert!(s["summary"]["drift"]["casimir"].as_f64().unwrap() <= 1e-8);
    assert!(s["summary"]["drift"]["H"].as_f64().unwrap() <= 1e-8);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,m0,phi0,phi1,phi2,H,casimir\n"));
    assert_eq!(text.lines().count(), 10_002);

    let o = run(&[
        "flow",
        "so3",
        "--hamiltonian",
        "zero",
        "--steps",
        "5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows: Vec<String> = fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1.to_string())
        .collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| *r == rows[0]));

    let o = run(&[
        "flow",
        "so3",
        "--step",
        "0.05",
        "--steps",
        "200",
        "--compare-halving",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    let ratio = s["summary"]["halving"]["ratio"].as_f64().unwrap();
    assert!((10.0..=22.0).contains(&ratio), "{ratio}");
}

#[test]
fn flow_blowup_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    fs::write(
        &h,
        r#"{"op": "lambda", "args": [{"op": "product", "args": [
            {"op": "m", "args": [0]}, {"op": "m", "args": [0]}, {"op": "m", "args": [0]}]}]}"#,
    )
    .unwrap();
    let init = dir.path().join("p.json");
    fs::write(&init, r#"{"m": [10.0], "phi": [1.0]}"#).unwrap();
    let o = run(&[
        "flow",
        "seqtriple:1",
        "--hamiltonian",
        h.to_str().unwrap(),
        "--init",
        init.to_str().unwrap(),
        "--step",
        "0.5",
        "--steps",
        "100",
        "--out",
        dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("step"));
}

#[test]
fn roundtrip_presets_pass() {
    for model in ["seqtriple:32", "so3", "precotangent:16"] {
        let o = run(&["roundtrip", model]);
        assert_eq!(code(&o), 0, "{model}");
        let r: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(r["model_hash"].as_str().unwrap().len() == 64);
    }
}
