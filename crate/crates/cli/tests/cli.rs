//! End-to-end checks of the `nlheat` binary: spec'd example outputs, exit
//! codes, file artifacts, and JSON round-trips through the crate's own
//! parsers.

use std::path::{Path, PathBuf};
use std::process::Output;

use nlheat_cli::{CriterionDoc, SimSummary, SweepRow};
use nlheat_core::{ArgmaxT, SimOutcome, ThresholdReport, Verdict};

fn nlheat(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_nlheat"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn thresholds_reports_the_derived_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlheat(&[
        "thresholds",
        "--d",
        "4",
        "--p",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = stdout_of(&out);
    let report: ThresholdReport = serde_json::from_str(&text).unwrap();
    assert!(
        (report.n_exact - 1.5958).abs() < 1e-4,
        "N_exact = {}",
        report.n_exact
    );
    assert!(
        (report.morrey_norm_uc - 6.5797).abs() < 1e-4,
        "morrey_norm_uC = {}",
        report.morrey_norm_uc
    );

    let on_disk = std::fs::read_to_string(dir.path().join("thresholds.json")).unwrap();
    assert_eq!(on_disk, text);
}

#[test]
fn thresholds_rejects_missing_singular_state() {
    let out = nlheat(&["thresholds", "--d", "3", "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&stderr).unwrap();
    assert_eq!(doc["error"]["kind"], "domain");
    assert!(
        doc["error"]["message"]
            .as_str()
            .unwrap()
            .contains("singular solution requires"),
        "stderr: {stderr}"
    );
}

#[test]
fn thresholds_asymptotics_agree_in_high_dimension() {
    let out = nlheat(&["thresholds", "--d", "100", "--p", "3"]);
    let report: ThresholdReport = serde_json::from_str(&stdout_of(&out)).unwrap();
    let ratio = report.n_exact / report.n_asymptotic;
    assert!((ratio - 1.0).abs() < 0.01, "exact/asymptotic = {ratio}");
}

#[test]
fn thresholds_csv_format() {
    let out = nlheat(&["thresholds", "--d", "4", "--p", "3", "--format", "csv"]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("N_exact,N_asymptotic,M_bound,M_asymptotic,morrey_norm_uC")
    );
    let row = lines.next().unwrap();
    let first: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert!((first - 1.5958).abs() < 1e-4);
}

#[test]
fn thresholds_accepts_ratio_exponent() {
    // 3 = 9/3 exactly; the ratio form must land on the same constants
    let plain = nlheat(&["thresholds", "--d", "4", "--p", "3"]);
    let ratio = nlheat(&["thresholds", "--d", "4", "--p", "9/3"]);
    assert_eq!(stdout_of(&plain), stdout_of(&ratio));
}

#[test]
fn criterion_verdict_examples() {
    let dir = tempfile::tempdir().unwrap();

    let config = write_config(
        dir.path(),
        r#"{"d": 4, "p": 3, "profile": {"kind": "singular", "scale": 2.0}}"#,
    );
    let out = nlheat(&["criterion", "--config", config.to_str().unwrap()]);
    let doc: CriterionDoc = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc.report.verdict, Verdict::BlowupPredicted);
    assert!(doc.report.margin > 0.0);
    assert!(doc.report.blowup_time_bound.is_some());

    let config = write_config(
        dir.path(),
        r#"{"d": 4, "p": 3, "profile": {"kind": "singular", "scale": 1.0}}"#,
    );
    let out = nlheat(&["criterion", "--config", config.to_str().unwrap()]);
    let doc: CriterionDoc = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc.report.verdict, Verdict::Inconclusive);
    assert_eq!(doc.report.blowup_time_bound, None);

    let config = write_config(
        dir.path(),
        r#"{"d": 3, "p": 2, "profile": {"kind": "constant", "level": 1.0}}"#,
    );
    let out = nlheat(&["criterion", "--config", config.to_str().unwrap()]);
    let doc: CriterionDoc = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc.report.verdict, Verdict::BlowupPredicted);
    assert_eq!(doc.report.argmax_t, ArgmaxT::Divergent);
    // constant data follow u' = u^p exactly, so level 1 at p = 2 cannot be
    // continued past t = 1
    let bound = doc.report.blowup_time_bound.unwrap();
    assert!((bound - 1.0).abs() < 1e-6, "bound = {bound}");
}

#[test]
fn criterion_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"d": 3, "p": 3, "profile": {"kind": "constant", "level": 1.0}}"#,
    );
    let base = nlheat(&["criterion", "--config", config.to_str().unwrap()]);
    let base: CriterionDoc = serde_json::from_str(&stdout_of(&base)).unwrap();
    assert!((base.report.threshold - 0.5f64.sqrt()).abs() < 1e-12);

    let overridden = nlheat(&[
        "criterion",
        "--config",
        config.to_str().unwrap(),
        "--p",
        "2",
    ]);
    let overridden: CriterionDoc = serde_json::from_str(&stdout_of(&overridden)).unwrap();
    assert!((overridden.report.threshold - 1.0).abs() < 1e-12);
}

#[test]
fn criterion_weighted_bound_with_beta() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"d": 3, "p": 2, "t_max": 1.0, "profile": {"kind": "constant", "level": 0.1}}"#,
    );
    let out = nlheat(&[
        "criterion",
        "--config",
        config.to_str().unwrap(),
        "--beta",
        "1",
    ]);
    let doc: CriterionDoc = serde_json::from_str(&stdout_of(&out)).unwrap();
    let expected = 1.5 / std::f64::consts::PI.sqrt();
    let got = doc.weighted_bound.unwrap();
    assert!(
        (got - expected).abs() < 1e-9 * expected,
        "weighted bound = {got}"
    );

    // without beta the field is absent entirely
    let out = nlheat(&["criterion", "--config", config.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert!(!text.contains("weighted_bound"));
    let doc: CriterionDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.weighted_bound, None);
}

#[test]
fn simulate_blowup_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "d": 4, "p": 3,
            "profile": {"kind": "truncated_singular", "scale": 2.0, "cap": 10.0},
            "grid": {"r_min": 1e-3, "r_max": 20.0, "n_cells": 512},
            "t_max": 1.0,
            "solver": {"inner_boundary": "reflect", "record_dt": 0.002, "snapshot_times": [0.0]}
        }"#,
    );
    let run_dir = dir.path().join("run");
    let out = nlheat(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    let text = stdout_of(&out);
    let summary: SimSummary = serde_json::from_str(&text).unwrap();
    match summary.outcome {
        SimOutcome::BlewUp {
            t_blow,
            sup_at_detection,
        } => {
            assert!(t_blow > 0.0 && t_blow < 0.1);
            assert!(sup_at_detection >= 1e8);
        }
        other => panic!("expected blowup, got {other:?}"),
    }
    assert!(summary.records >= 3);
    assert_eq!(summary.snapshot_times, vec![0.0]);

    let on_disk = std::fs::read_to_string(run_dir.join("summary.json")).unwrap();
    assert_eq!(on_disk, text);

    let series = std::fs::read_to_string(run_dir.join("series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next(), Some("t,W,mass_L1,sup_norm"));
    assert!(lines.count() == summary.records);

    let snapshot = std::fs::read_to_string(run_dir.join("snapshot_000.csv")).unwrap();
    let mut lines = snapshot.lines();
    assert_eq!(lines.next(), Some("t,r,u"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 513);
    for row in &rows {
        assert!(
            row.starts_with("0,"),
            "snapshot row should carry t = 0: {row}"
        );
    }
}

#[test]
fn simulate_survival_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "d": 2, "p": 2,
            "profile": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0},
            "grid": {"r_min": 1e-3, "r_max": 10.0, "n_cells": 128},
            "t_max": 0.05,
            "solver": {"inner_boundary": "reflect"}
        }"#,
    );
    let out = nlheat(&["simulate", "--config", config.to_str().unwrap()]);
    let summary: SimSummary = serde_json::from_str(&stdout_of(&out)).unwrap();
    match summary.outcome {
        SimOutcome::Survived { horizon, final_sup } => {
            assert!((horizon - 0.05).abs() < 1e-9);
            assert!(final_sup > 0.0 && final_sup < 2.0);
        }
        other => panic!("expected survival, got {other:?}"),
    }
}

#[test]
fn simulate_step_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "d": 2, "p": 2,
            "profile": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0},
            "grid": {"r_min": 1e-3, "r_max": 10.0, "n_cells": 128},
            "t_max": 1.0,
            "solver": {"inner_boundary": "reflect", "cfl_coeff": 10.0, "record_dt": 1.0}
        }"#,
    );
    let run_dir = dir.path().join("run");
    let out = nlheat(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&stderr).unwrap();
    assert_eq!(doc["error"]["kind"], "step_failure");

    // the partial summary is still on disk for forensics
    let on_disk = std::fs::read_to_string(run_dir.join("summary.json")).unwrap();
    let summary: SimSummary = serde_json::from_str(&on_disk).unwrap();
    assert!(matches!(summary.outcome, SimOutcome::StepFailure { .. }));
}

fn sweep_config(values: &str, parameter: &str) -> String {
    format!(
        r#"{{
            "d": 4, "p": 3,
            "profile": {{"kind": "truncated_singular", "scale": 2.0, "cap": 10.0}},
            "grid": {{"n_cells": 1024, "r_max": 50.0}},
            "t_max": 5.0,
            "solver": {{"inner_boundary": "reflect"}},
            "sweep": {{"parameter": "{parameter}", "values": {values}}}
        }}"#
    )
}

#[test]
fn sweep_scale_dichotomy() {
    let dir = tempfile::tempdir().unwrap();
    // deliberately unsorted: the output must be ordered by parameter value
    let config = write_config(
        dir.path(),
        &sweep_config("[2.0, 0.5, 1.2, 0.9, 1.6]", "scale"),
    );
    let out = nlheat(&["sweep", "--config", config.to_str().unwrap()]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("parameter,verdict,t_blow_or_horizon,criterion_margin")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    let ns: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ns, vec![0.5, 0.9, 1.2, 1.6, 2.0]);
    for row in &rows {
        let n: f64 = row[0].parse().unwrap();
        let margin: f64 = row[3].parse().unwrap();
        if n <= 0.9 {
            assert_eq!(row[1], "survived", "N = {n}");
            assert!(margin < 0.0);
        }
        if n >= 1.6 {
            assert_eq!(row[1], "blew_up", "N = {n}");
            assert!(margin > 0.0);
        }
    }

    // json format parses into the same rows
    let out = nlheat(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let rows_json: Vec<SweepRow> = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(rows_json.len(), 5);
    assert_eq!(rows_json[0].verdict, "survived");
    assert_eq!(rows_json[4].verdict, "blew_up");
}

#[test]
fn sweep_cap_trend() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &sweep_config("[10.0, 100.0, 1000.0]", "cap"));
    let out = nlheat(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let rows: Vec<SweepRow> = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert_eq!(row.verdict, "blew_up", "cap = {}", row.parameter);
    }
    for pair in rows.windows(2) {
        assert!(
            pair[1].t_blow_or_horizon <= pair[0].t_blow_or_horizon,
            "t_blow should be nonincreasing in the cap: {pair:?}"
        );
    }
}

#[test]
fn sweep_empty_range() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &sweep_config("[]", "scale"));
    let out = nlheat(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(
        stdout_of(&out),
        "parameter,verdict,t_blow_or_horizon,criterion_margin\n"
    );
}

#[test]
fn malformed_and_incomplete_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();

    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = nlheat(&["criterion", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stderr).unwrap()).unwrap();
    assert_eq!(doc["error"]["kind"], "parse");

    let config = write_config(dir.path(), r#"{"d": 4, "p": 3}"#);
    let out = nlheat(&["criterion", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stderr).unwrap()).unwrap();
    assert_eq!(doc["error"]["kind"], "domain");
    assert!(doc["error"]["message"]
        .as_str()
        .unwrap()
        .contains("missing profile"));
}
