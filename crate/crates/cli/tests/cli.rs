use std::path::Path;
use std::process::{Command, Output};

use burgers_drift_cli::error::CliError;
use burgers_drift_cli::report::{Bound, Check, Report};
use burgers_drift_cli::THREADS_ENV;
use proptest::prelude::*;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burgers-drift")).args(args).output().expect("spawn")
}

fn report_of(out: &Output) -> Report {
    String::from_utf8_lossy(&out.stdout).parse().expect("report parses")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn findim_suite_passes() {
    let out = bin(&["verify", "--suite", "findim"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report_of(&out);
    assert!(r.metrics["conservation_drift"] < 1e-8);
    assert!(r.checks.iter().any(|c| c.tag == "finite-dim-conservation" && c.pass));
    assert_eq!(r.checks.len(), 4);
}

#[test]
fn kernel_assemble_writes_symmetric_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.csv");
    let out = bin(&["kernel", "assemble", "--eps", "0.01", "--nodes", "48", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("M=48,eps=0.01,"));
    assert_eq!(lines.next().unwrap().split(',').count(), 48);
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 48);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 48);
        assert!(row.iter().enumerate().all(|(j, &v)| v == rows[j][i]));
    }
    let k = burgers_drift::KernelMatrix::from_csv(&text).unwrap();
    assert_eq!(k.size(), 48);
}

#[test]
fn asymptotic_kernel_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k0.csv");
    let out = bin(&["kernel", "assemble", "--eps", "0", "--nodes", "8", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("M=8,eps=asymptotic,"));
}

#[test]
fn impossible_threshold_fails_and_names_metric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "# impossible\nthreshold.conservation_drift = 0\n");
    let out = bin(&["verify", "--suite", "all", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("conservation_drift"));
    let r = report_of(&out);
    let failed: Vec<&Check> = r.failures().collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].metric, "conservation_drift");
}

#[test]
fn error_paths_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_flag = bin(&["verify", "--bogus"]).status.code();
    let missing = dir.path().join("missing.cfg");
    let unreadable = bin(&["verify", "--config", missing.to_str().unwrap()]).status.code();
    let bad_range = bin(&["drift", "--eps", "-1"]).status.code();
    assert_eq!(unknown_flag, Some(2));
    assert_eq!(unreadable, Some(4));
    assert_eq!(bad_range, Some(5));
    let unknown_key = write(dir.path(), "u.cfg", "eps = 0.01\ncolour = red\n");
    let out = bin(&["drift", "--config", &unknown_key]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    let unknown_metric = write(dir.path(), "m.cfg", "threshold.nothing = 1\n");
    assert_eq!(bin(&["verify", "--config", &unknown_metric]).status.code(), Some(4));
    assert_eq!(bin(&["kernel", "assemble", "--nodes", "4"]).status.code(), Some(2));
    assert_eq!(bin(&["findim", "--example", "4"]).status.code(), Some(2));
    assert_eq!(bin(&["optimize", "--iters", "0"]).status.code(), Some(5));
    assert_eq!(CliError::from(burgers_drift::Error::BlowUp { time: 0.1, sup: 1e9, bound: 1.0 }).exit_code(), 3);
}

#[test]
fn config_overrides_defaults_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.cfg", "samples = 2\nn_x = 63\nn_t = 50\nseed = 4\n");
    let r = report_of(&bin(&["drift", "--config", &cfg, "--seed", "9"]));
    assert_eq!(r.params["samples"], "2");
    assert_eq!(r.params["n_x"], "63");
    assert_eq!(r.params["seed"], "9");
    let cfg = write(dir.path(), "e.cfg", "example = 2\n");
    let r = report_of(&bin(&["findim", "--config", &cfg]));
    assert!(r.metrics.contains_key("second_derivative_drift_rel_error"));
    assert!(!r.metrics.contains_key("conservation_drift"));
}

#[test]
fn runs_are_deterministic_across_thread_counts() {
    let args = ["drift", "--eps", "0.01", "--samples", "4", "--seed", "3", "--n-x", "63", "--n-t", "100"];
    let serial = report_of(&bin(&args));
    let parallel = Command::new(env!("CARGO_BIN_EXE_burgers-drift")).args(args).env(THREADS_ENV, "4").output().unwrap();
    let parallel = report_of(&parallel);
    assert_eq!(serial.metrics.keys().collect::<Vec<_>>(), parallel.metrics.keys().collect::<Vec<_>>());
    for (k, v) in &serial.metrics {
        assert!((v - parallel.metrics[k]).abs() < 1e-12, "{k}");
    }
    let bad = Command::new(env!("CARGO_BIN_EXE_burgers-drift")).args(args).env(THREADS_ENV, "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(5));
}

#[test]
fn report_file_and_trace_written() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.txt");
    let trace = dir.path().join("t.csv");
    let out = bin(&[
        "optimize", "--iters", "5", "--seed", "1", "--report", report.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let from_file: Report = std::fs::read_to_string(&report).unwrap().parse().unwrap();
    assert_eq!(from_file, report_of(&out));
    assert!(from_file.metrics["final_projection"] > 0.0);
    let t = std::fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("iteration,cost,projection\n"));
    assert_eq!(t.lines().count() as f64, from_file.metrics["iterations"] + 2.0);
}

#[test]
fn coercivity_report() {
    let out = bin(&["coercivity", "--eps-list", "0", "--nodes", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report_of(&out);
    assert!(r.metrics["coercivity_constant.0.0"] > 0.74);
}

#[test]
fn malformed_reports_rejected() {
    assert!("experiment = x\n".parse::<Report>().is_err());
    assert!("experiment = x\nstatus = pass\nduration_s = 1\ncheck.a = m ~ 1 pass\n".parse::<Report>().is_err());
    assert!("experiment = x\nstatus = pass\nduration_s = 1\ncheck.a = m < 1 fail\n".parse::<Report>().is_err());
    assert!("experiment = x\nstatus = pass\nduration_s = 1\nother = 2\n".parse::<Report>().is_err());
}

fn arb_bound() -> impl Strategy<Value = Bound> {
    prop_oneof![Just(Bound::Below), Just(Bound::Above), Just(Bound::AtLeast)]
}

proptest! {
    #[test]
    fn report_round_trips(
        metrics in prop::collection::btree_map("[a-z_]{1,12}", any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..8),
        params in prop::collection::btree_map("[a-z_]{1,8}", "[a-z0-9.,/]{0,10}", 0..5),
        checks in prop::collection::vec(("[a-z-]{1,10}", "[a-z_]{1,10}", arb_bound(), -1e6f64..1e6, any::<bool>()), 0..5),
        duration in 0.0f64..1e4,
    ) {
        let r = Report {
            experiment: "verify.all".into(),
            params,
            metrics,
            checks: checks.into_iter().map(|(tag, metric, bound, threshold, pass)| Check { tag, metric, bound, threshold, pass }).collect(),
            duration_s: duration,
        };
        let back: Report = r.to_string().parse().unwrap();
        prop_assert_eq!(back, r);
    }
}
