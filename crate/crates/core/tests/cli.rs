use std::path::Path;
use std::process::Command;

use conjugate_decoherence::config::{validate, ExperimentConfig, Output, FIGURE1_CONFIG};
use conjugate_decoherence::runner::{run, run_with, RunOptions, REPORT_FILE};
use conjugate_decoherence::{Basis, Error};

const SMALL: &str = r#"
model.sigma = 1.0
model.eta1 = 1.0
model.eta2 = 1.0
grid.position.n = 96
grid.position.half_width = 24.0
grid.momentum.n = 96
grid.momentum.half_width = 12.0
times = [0.0, 1.0, 2.0]
outputs = ["matrices", "diagonals", "metrics", "heatmaps"]
heatmap.n = 41
oracle.grid_n = 48
oracle.times = [1.0, 2.0]
"#;

fn config_in(dir: &Path, text: &str) -> ExperimentConfig {
    let mut cfg = validate(text).unwrap();
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn validation_errors(text: &str) -> Vec<String> {
    match validate(text) {
        Err(Error::Validation(e)) => e,
        other => panic!("expected validation errors, got {other:?}"),
    }
}

#[test]
fn sizing_rule_violation_cites_required_width() {
    let text = FIGURE1_CONFIG.replace("grid.position.half_width = 88.0", "grid.position.half_width = 20.0");
    let errors = validation_errors(&text);
    assert!(
        errors.iter().any(|e| e.contains("sizing rule") && e.contains("88.0000")),
        "{errors:?}"
    );
}

#[test]
fn unknown_keys_and_decreasing_times_are_rejected() {
    let text = SMALL.replace("times = [0.0, 1.0, 2.0]", "times = [5.0, 3.0]\nmodel.sigmaa = 2.0");
    let errors = validation_errors(&text);
    assert!(errors.iter().any(|e| e == "times must be strictly increasing"));
    assert!(errors.iter().any(|e| e.contains("unknown key `model.sigmaa`")));
    let text = SMALL.replace("oracle.grid_n = 48", "oracle.grid_n = 65");
    assert!(validation_errors(&text).iter().any(|e| e.contains("cap of 64")));
}

#[test]
fn single_time_metrics_show_a_pure_state() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("times = [0.0, 1.0, 2.0]", "times = [0.0]")
        .replace(r#"outputs = ["matrices", "diagonals", "metrics", "heatmaps"]"#, r#"outputs = ["metrics"]"#)
        .replace("oracle.grid_n = 48\noracle.times = [1.0, 2.0]\n", "");
    let report = run(&config_in(dir.path(), &text)).unwrap();
    assert_eq!(report.rows.len(), 2);
    for row in &report.rows {
        assert!((row.metrics.purity - 1.0).abs() < 1e-9);
        assert!(row.metrics.entropy < 1e-6);
    }
    let names: Vec<&str> = report.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(names, vec!["metrics.csv"]);
    assert!(dir.path().join(REPORT_FILE).exists());
}

#[test]
fn full_run_emits_checked_artifacts_and_oracle_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config_in(dir.path(), SMALL)).unwrap();
    assert_eq!(report.rows.len(), 6);
    for row in &report.rows {
        assert!(row.trace_error <= 1e-9);
        assert!(row.hermiticity_error <= 1e-12);
        assert!(row.metrics.min_eigenvalue >= -1e-8);
        assert!(row.analytic_residual.unwrap() < 1e-6);
    }
    assert_eq!(report.oracle.len(), 4);
    assert!(report.oracle.iter().all(|r| r.passed && r.max_abs_diff <= 1e-3));
    assert_eq!(report.heatmaps.len(), 6);

    // matrices on disk are trace-one and Hermitian
    let csv = std::fs::read_to_string(dir.path().join("matrices/position_t002.csv")).unwrap();
    let mut elems = std::collections::HashMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (j, k): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        elems.insert((j, k), (f[2].parse::<f64>().unwrap(), f[3].parse::<f64>().unwrap()));
    }
    let trace: f64 = (0..96).map(|j| elems[&(j, j)].0).sum();
    assert!((trace - 1.0).abs() < 1e-9);
    assert!(elems.iter().all(|(&(j, k), &(re, im))| {
        let (r2, i2) = elems[&(k, j)];
        (re - r2).abs() <= 1e-12 && (im + i2).abs() <= 1e-12
    }));
    for f in &report.files {
        let bytes = std::fs::metadata(dir.path().join(&f.path)).unwrap().len();
        assert_eq!(bytes, f.bytes);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let options = |d: &Path| RunOptions {
        workers: Some(1),
        output_dir: Some(d.to_path_buf()),
        ..RunOptions::default()
    };
    let cfg = validate(SMALL).unwrap();
    let ra = run_with(&cfg, &options(a.path())).unwrap();
    let rb = run_with(&cfg, &options(b.path())).unwrap();
    assert!(!ra.files.is_empty());
    assert_eq!(ra.files, rb.files);
}

#[test]
fn finite_mass_runs_the_momentum_basis_only() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("grid.position.n = 96\ngrid.position.half_width = 24.0\n", "")
        .replace("model.eta2 = 1.0", "model.eta2 = 1.0\nmodel.mass = 1.0");
    let cfg = config_in(dir.path(), &text);
    assert!(!cfg.wants(Output::ScalingFits));
    let report = run(&cfg).unwrap();
    assert!(report.rows.iter().all(|r| r.metrics.basis == Basis::Momentum));
    assert!(report.rows.iter().all(|r| r.analytic_residual.is_none()));
    assert!(report.oracle.iter().all(|r| r.passed));
    let with_position = SMALL.replace("model.eta2 = 1.0", "model.eta2 = 1.0\nmodel.mass = 1.0");
    assert!(validation_errors(&with_position)
        .iter()
        .any(|e| e.contains("grid.position is not used")));
}

#[test]
fn exit_codes_classify_failures() {
    assert_eq!(Error::Validation(vec![]).exit_code(), 1);
    let io = Error::Io {
        path: "x".into(),
        source: std::io::Error::other("boom"),
    };
    assert_eq!(io.exit_code(), 3);
    let psd = Error::NotPositiveSemidefinite { min_eigenvalue: -1.0 };
    assert_eq!(psd.exit_code(), 2);
    let staged = Error::Stage {
        t: 1.0,
        stage: "kernel",
        source: Box::new(Error::Invariant("x".into())),
    };
    assert_eq!(staged.exit_code(), 2);
}

fn decohere(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_decohere"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn binary_subcommands_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, SMALL).unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, SMALL.replace("times = [0.0, 1.0, 2.0]", "times = [2.0, 1.0]")).unwrap();
    let out = dir.path().join("out");
    let out_str = out.to_str().unwrap();

    let v = decohere(&["validate", good.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0));
    let echoed = validate(&String::from_utf8(v.stdout).unwrap()).unwrap();
    assert_eq!(echoed, validate(SMALL).unwrap());

    let v = decohere(&["validate", bad.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stderr).contains("times must be strictly increasing"));

    let missing = decohere(&["run", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(3));

    let o = decohere(&["oracle", good.to_str().unwrap(), "--output-dir", out_str, "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("oracle.csv").exists());
    assert!(!out.join("metrics.csv").exists());

    let r = decohere(&["run", good.to_str().unwrap(), "--output-dir", out_str, "--strict"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(out.join("metrics.csv").exists());
    assert!(out.join("heatmaps/momentum_t002.csv").exists());
}
