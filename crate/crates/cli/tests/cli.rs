use std::path::Path;
use std::process::{Command, Output};

fn adiawalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiawalk")).args(args).env_remove("ADIAWALK_THREADS").output().expect("binary runs")
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn list_names_every_experiment() {
    let out = adiawalk(&["--list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["gap-table", "spectrum-scan", "fidelity-sweep", "volterra", "grover-scaling", "qaoa-export", "step-size-report"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn unknown_experiment_exits_2_with_names() {
    let out = adiawalk(&["no-such-thing"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("gap-table") && err.contains("volterra"));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"experiment":"gap-table","parameters":{"bogus":1}}"#).unwrap();
    assert_eq!(adiawalk(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, r#"{"experiment":"gap-table","extra":true}"#).unwrap();
    assert_eq!(adiawalk(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(adiawalk(&["qaoa-export", "--set", "N=1"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    // Levels cross at s = 1/2, so no step size exists.
    let src = r#"source={"kind":"diagonal","h0":[0,1],"h1":[1,0]}"#;
    let out = adiawalk(&["step-size-report", "--set", src, "--set", "grid=101"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gap_table_has_eleven_rows() {
    let out = adiawalk(&["gap-table", "--set", "grid=201"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines[0], "epsilon,gap_h,gap_w,published_gap_h,published_gap_w,flagged");
    assert_eq!(lines.len(), 12);
    assert!(text.contains("# rng: ChaCha8"));
    assert!(text.lines().any(|l| l.starts_with("# config-sha256: ")));
}

fn run_to(cfg: &Path, out: &Path) -> Vec<u8> {
    let o = adiawalk(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out).unwrap()
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"experiment":"step-size-report","seed":11,"parameters":{"source":{"kind":"random","count":3,"dim":4},"kinds":["pf1","spf4"]}}"#,
    )
    .unwrap();
    let a = run_to(&cfg, &dir.path().join("a.csv"));
    let b = run_to(&cfg, &dir.path().join("b.csv"));
    assert_eq!(a, b);
    let o = adiawalk(&["--config", cfg.to_str().unwrap(), "--seed", "12"]);
    assert_ne!(o.stdout, a);
}

#[test]
fn summary_sidecar_written_for_volterra() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = adiawalk(&["volterra", "--set", "Td=[50,100,200,400]", "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.summary.json")).unwrap()).unwrap();
    let slope = summary["interior_slope"].as_f64().unwrap();
    assert!((slope + 1.0).abs() < 0.1, "{slope}");
    assert_eq!(data_lines(&std::fs::read_to_string(&out).unwrap()).len(), 5);
}
