use std::path::Path;
use std::process::Command;

fn ttgda(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ttgda"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn run_writes_trace_and_summary_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        r#"{"problem": "bilinear", "eta_x": 1e-3, "eta_y": 1e-2, "max_iters": 1000,
            "seed": 7, "diagnostics_every": 100, "x0": [0.5], "output": "ignored"}"#,
    );
    let mut traces = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let res = ttgda(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        let summary: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["grad_evals"], 1000);
        assert_eq!(summary["seed"], 7);
        traces.push(std::fs::read(out.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    let text = String::from_utf8(traces[0].clone()).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(",moreau_grad_norm,")).count(), 11);
    assert!(!Path::new("ignored").exists());
}

#[test]
fn seed_flag_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("o");
    write(
        &cfg,
        &format!(
            r#"{{"problem": "wgan-linear", "algorithm": "ttsgda", "eta_x": 1e-3, "eta_y": 1e-2,
                "max_iters": 10, "seed": 1, "output": "{}"}}"#,
            out.display()
        ),
    );
    let res = ttgda(&["run", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 5);
}

#[test]
fn invalid_regime_is_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(&cfg, r#"{"problem": "bilinear", "regime": "smooth-ncsc"}"#);
    let res = ttgda(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("regime:") && err.contains("μ>0 required"), "{err}");
}

#[test]
fn sweep_writes_sorted_table_and_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    let out = dir.path().join("sweep");
    write(
        &cfg,
        &format!(
            r#"{{"base": {{"problem": "quadratic-ncsc", "max_iters": 200, "x0": [0.1, 0.1, 0.1, 0.1, 0.1],
                 "output": "{}"}},
                "eta_y": [0.1, 1.0], "ratio": [10, 100, 1000]}}"#,
            out.display()
        ),
    );
    let res = ttgda(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 7);
    let mut rdr = csv::Reader::from_reader(table.as_bytes());
    let finals: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[5].parse::<f64>().unwrap_or(f64::INFINITY))
        .collect();
    assert!(finals.windows(2).all(|w| w[0] <= w[1]), "{finals:?}");
    for i in 0..6 {
        assert!(out.join(format!("cell-{i:03}")).join("trace.csv").is_file());
    }
}

#[test]
fn check_prints_machine_readable_report() {
    let res = ttgda(&["check", "--problem", "bilinear", "--suite", "oracles"]);
    assert!(res.status.success());
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["passed"], true);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c.get("tolerance").is_some() && c.get("worst_margin").is_some()));
}
