//! End-to-end library scenarios on small configurations.

use std::path::Path;

use ultranorm::commands::{run, CommandKind};
use ultranorm::config::{Experiment, ExperimentConfig};
use ultranorm::komatsu::{regularize, RSequence};
use ultranorm::report::Status;
use ultranorm::verify::verify_report;

fn experiment(json: &str) -> Experiment {
    Experiment::build(ExperimentConfig::from_json(json).unwrap(), Path::new(".")).unwrap()
}

#[test]
fn small_tau_fails_admissibility_and_names_it() {
    let exp = experiment(r#"{"functions": {"subset": ["gauss_w1"]}, "suite": {"tau": 0.1}}"#);
    let report = verify_report(&exp).unwrap();
    let adm = report
        .checks
        .iter()
        .find(|c| c.name == "hypothesis.admissibility")
        .expect("admissibility record present");
    assert_eq!(adm.status, Status::Fail);
    assert!(adm.measured.keys().any(|k| k.starts_with("log_ratio[")));
    assert_eq!(report.summary.status, Status::Fail);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn default_tau_passes_admissibility() {
    let exp = experiment(r#"{"functions": {"subset": ["gauss_w1"]}}"#);
    let report = verify_report(&exp).unwrap();
    let adm = report.checks.iter().find(|c| c.name == "hypothesis.admissibility").unwrap();
    assert_eq!(adm.status, Status::Pass);
}

#[test]
fn zero_function_passes_vacuously() {
    let exp = experiment(r#"{"functions": {"list": [{"name": "zero", "terms": []}]}, "suite": {"kind": "all"}}"#);
    let report = verify_report(&exp).unwrap();
    let per_function: Vec<_> = report.checks.iter().filter(|c| c.name.contains("[zero")).collect();
    assert!(per_function.len() >= 8, "{} records", per_function.len());
    for c in &per_function {
        assert_eq!(c.status, Status::Pass, "{}", c.name);
    }
    assert_eq!(report.summary.status, Status::Pass);
}

#[test]
fn geometric_r_is_fixed_by_regularization() {
    for (scale, base) in [(0.5, 2.0), (1.0, 1.5), (0.1, 2.0)] {
        let json = format!(r#"{{"geometric": {{"scale": {scale}, "base": {base}}}}}"#);
        let spec = serde_json::from_str(&json).unwrap();
        let r: RSequence = ultranorm::config::build_r("geo", &spec).unwrap();
        let reg = regularize(&r, 200).unwrap();
        for j in 0..=200 {
            let (a, b) = (r.log_value(j).unwrap(), reg.log_value(j).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "scale {scale} base {base} j {j}");
        }
    }
}

#[test]
fn fast_growing_r_is_capped_by_regularization() {
    let r = RSequence::from_table("jumpy", &[0.5, 1.0, 100.0, 100.0, 1e6, 1e6, 1e7], true).unwrap();
    let reg = regularize(&r, 6).unwrap();
    // c = 0.5, cap c 2^j
    assert!((reg.value(2).unwrap() - 2.0).abs() < 1e-12);
    assert!((reg.value(4).unwrap() - 8.0).abs() < 1e-12);
    assert!((reg.value(1).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn constant_system_experiment_passes() {
    let json = r#"{
        "functions": {"subset": ["gauss_w1", "shift_1"]},
        "weight_systems": {"V": {"constant": {"exp_norm": 1.0}}},
        "suite": {"tau": 2.0, "c_adm": 2.0}
    }"#;
    let report = verify_report(&experiment(json)).unwrap();
    assert!(report.checks.iter().any(|c| c.name == "mollify"));
    assert_eq!(report.summary.fail, 0);
    assert_eq!(report.summary.inconclusive, 0);
}

#[test]
fn assoc_command_reports_known_values() {
    let exp = experiment(r#"{"grids": {"assoc": {"lo": 0.0, "hi": 0.30102999566398120, "n": 2}}}"#);
    let out = run(CommandKind::Assoc, &exp, false).unwrap();
    let (_, table) = &out.tables[0];
    let col = table.headers.iter().position(|h| h == "M[M]").unwrap();
    let m1: f64 = table.rows[0][col].parse().unwrap();
    let m2: f64 = table.rows[1][col].parse().unwrap();
    assert_eq!(m1, 0.0);
    assert!((m2 - 2f64.ln()).abs() < 1e-12);
    assert_eq!(out.report.summary.status, Status::Pass);
}

#[test]
fn two_dimensional_experiment_builds_and_checks_sequences() {
    let exp = experiment(r#"{"dim": 2, "functions": {"subset": ["gauss_w1"]}}"#);
    let out = run(CommandKind::CheckSeq, &exp, false).unwrap();
    assert_eq!(out.report.summary.fail, 0);
    assert_eq!(exp.t_points()[0].len(), 2);
}
