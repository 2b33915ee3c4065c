use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn equinuc(config: &Path, report: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equinuc"))
        .arg("--config")
        .arg(config)
        .arg("--report")
        .arg(report)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn read_report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// The report with per-step timings zeroed.
fn untimed(mut report: Value) -> Value {
    for check in report["checks"].as_array_mut().unwrap() {
        check["elapsed_ms"] = Value::from(0.0);
    }
    report
}

#[test]
fn fixtures_exit_with_the_expected_codes() {
    let expected = [
        ("configs/z2_module.json", 0),
        ("configs/z2_all.json", 0),
        ("configs/m2_trace.json", 0),
        ("configs/s3_sign.json", 0),
        ("configs/translation_c5.json", 0),
        ("configs/z3_normalization.json", 0),
        ("configs/z4_sweep.json", 0),
        ("configs/z3_truncated.json", 1),
        ("configs/z2_pre_factor.json", 1),
        ("configs/z2_tuple_window.json", 1),
        ("configs/z2_biased_state.json", 1),
        ("certificates/z2_swap.json", 0),
        ("certificates/m2_swap.json", 0),
        ("certificates/s3_scalar.json", 0),
        ("invalid/malformed.json", 2),
        ("invalid/missing_seed.json", 2),
        ("invalid/bad_permutation.json", 2),
        ("invalid/unknown_task.json", 2),
        ("invalid/ambiguous_window.json", 2),
        ("invalid/unnormalized_field.json", 2),
        ("invalid/sweep_needs_cyclic.json", 2),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (rel, code) in expected {
        let out = equinuc(&fixture(rel), &dir.path().join("r.json"), &[]);
        assert_eq!(
            out.status.code(),
            Some(code),
            "{rel}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn config_errors_name_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    for (rel, pointer) in [
        ("invalid/missing_seed.json", "/seed"),
        ("invalid/bad_permutation.json", "/action/maps"),
        ("invalid/unknown_task.json", "/tasks/0"),
        ("invalid/ambiguous_window.json", "/window"),
        ("invalid/unnormalized_field.json", "/field"),
        ("invalid/sweep_needs_cyclic.json", "/tasks"),
    ] {
        let report = dir.path().join("r.json");
        let out = equinuc(&fixture(rel), &report, &[]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(
            stderr.contains(&format!("config error at {pointer}")),
            "{rel}: {stderr}"
        );
        assert!(!report.exists(), "{rel} wrote a report");
    }
    let out = equinuc(Path::new("/nonexistent/config.json"), &dir.path().join("r.json"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_reproducible_and_order_stable() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("configs/z2_all.json");
    let paths: Vec<PathBuf> = (0..3).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    equinuc(&config, &paths[0], &[]);
    equinuc(&config, &paths[1], &[]);
    equinuc(&config, &paths[2], &["--parallel"]);
    let first = untimed(read_report(&paths[0]));
    assert_eq!(first, untimed(read_report(&paths[1])));
    assert_eq!(first, untimed(read_report(&paths[2])));
    let names: Vec<&str> = first["tasks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_str().unwrap())
        .collect();
    assert_eq!(names.len(), 11);
}

#[test]
fn sweep_is_written_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = equinuc(
        &fixture("configs/z4_sweep.json"),
        &dir.path().join("r.json"),
        &["--csv", csv.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,max_defect,max_error,err_0,err_1,err_2,err_3"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    assert!(rows.windows(2).all(|w| w[1][2] <= w[0][2] + 1e-12));
    assert!(rows.last().unwrap()[2] <= 1e-10);

    let csv = dir.path().join("none.csv");
    let out = equinuc(
        &fixture("configs/z2_module.json"),
        &dir.path().join("r.json"),
        &["--csv", csv.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(!csv.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no CSV written"));
}

#[test]
fn flags_override_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let config = fixture("configs/z2_all.json");

    let out = equinuc(
        &config,
        &report,
        &["--task", "trace-property", "--task", "structure", "--seed", "99"],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = read_report(&report);
    assert_eq!(r["tasks"], serde_json::json!(["trace-property", "structure"]));
    assert_eq!(r["environment"]["seed"], 99);
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["name"].as_str().unwrap().starts_with("trace-property/")
            || c["name"].as_str().unwrap().starts_with("structure/")));

    let out = equinuc(&config, &report, &["--task", "everything"]);
    assert_eq!(out.status.code(), Some(2));
    let out = equinuc(&config, &report, &["--tol", "-1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = equinuc(&config, &report, &["--tol", "0.001"]);
    assert_eq!(out.status.code(), Some(2));

    let out = equinuc(&fixture("configs/z2_module.json"), &report, &["--tol", "0.0001"]);
    assert_eq!(out.status.code(), Some(0));
    let r = read_report(&report);
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["tolerance"] == 0.0001));
}

#[test]
fn certificate_cases_match_their_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let mut cases = 0;
    for rel in [
        "certificates/z2_swap.json",
        "certificates/m2_swap.json",
        "certificates/s3_scalar.json",
    ] {
        let report = dir.path().join("r.json");
        let out = equinuc(&fixture(rel), &report, &[]);
        assert_eq!(out.status.code(), Some(0), "{rel}");
        let r = read_report(&report);
        for c in r["checks"].as_array().unwrap() {
            let name = c["name"].as_str().unwrap();
            if name.starts_with("certificates/case/") {
                cases += 1;
                assert_eq!(c["pass"], true, "{name}: {}", c["detail"]);
            }
        }
    }
    assert!(cases >= 12, "only {cases} cases");
}

#[test]
fn table_lists_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = equinuc(&fixture("configs/z3_truncated.json"), &report, &[]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let r = read_report(&report);
    for c in r["checks"].as_array().unwrap() {
        assert!(stdout.contains(c["name"].as_str().unwrap()));
    }
    assert!(stdout.contains("FAIL"));
    assert!(stdout.contains(&format!("{} failed", r["summary"]["failed"])));
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Keys of `object` are declared in `schema` and its required keys are present.
fn conforms(object: &Value, schema: &Value, at: &str) {
    let declared = schema["properties"].as_object().unwrap();
    for key in object.as_object().unwrap().keys() {
        assert!(declared.contains_key(key), "{at}: undeclared key {key}");
    }
    for key in schema["required"].as_array().unwrap() {
        assert!(object.get(key.as_str().unwrap()).is_some(), "{at}: missing {key}");
    }
}

#[test]
fn reports_and_fixtures_match_the_documented_schemas() {
    let report_schema = schema("report-schema.json");
    let config_schema = schema("config-schema.json");
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    for rel in [
        "configs/z2_all.json",
        "configs/z4_sweep.json",
        "certificates/z2_swap.json",
    ] {
        equinuc(&fixture(rel), &report, &[]);
        let r = read_report(&report);
        conforms(&r, &report_schema, rel);
        let props = &report_schema["properties"];
        conforms(&r["environment"], &props["environment"], rel);
        conforms(&r["summary"], &props["summary"], rel);
        for c in r["checks"].as_array().unwrap() {
            conforms(c, &props["checks"]["items"], rel);
        }
        for key in ["structure", "normalization"] {
            if let Some(v) = r.get(key) {
                conforms(v, &props[key], rel);
            }
        }
        for row in r.get("sweep").and_then(Value::as_array).into_iter().flatten() {
            conforms(row, &props["sweep"]["items"], rel);
        }

        let config: Value = serde_json::from_str(&std::fs::read_to_string(fixture(rel)).unwrap()).unwrap();
        conforms(&config, &config_schema, rel);
    }
}
