//! End-to-end tests of the `opalg` binary: exit codes, report schema,
//! format selection, and witness re-verification on the emitted bytes.

use std::path::PathBuf;
use std::process::Command;

use opalg_cli::report::parse_report;

fn opalg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opalg"))
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const BELL_PAIR: &str = r#"{
  "left": {"label": "A1", "blocks": [2]},
  "right": {"label": "A2", "blocks": [2]},
  "seed": 11
}"#;

const SEPARATED_PAIR: &str = r#"{
  "left": {"label": "C2", "blocks": [1, 1]},
  "right": {"label": "M2", "blocks": [2]},
  "seed": 11
}"#;

#[test]
fn separation_reports_verdicts_as_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "sep.json", SEPARATED_PAIR);
    let out = opalg().arg("separation").arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let report = parse_report(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    match report.result {
        opalg_cli::report::ExperimentResult::Separation { separated, witness } => {
            assert!(separated);
            assert!(witness.is_none());
        }
        other => panic!("unexpected result {other:?}"),
    }

    let cfg = write_config(&dir, "bell.json", BELL_PAIR);
    let out = opalg().arg("separation").arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "non-separated must still exit 0");
    let report = parse_report(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    match report.result {
        opalg_cli::report::ExperimentResult::Separation { separated, witness } => {
            assert!(!separated);
            let w = witness.expect("witness attached");
            assert!((w.chsh_value - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
        }
        other => panic!("unexpected result {other:?}"),
    }
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();

    // Unparseable JSON.
    let cfg = write_config(&dir, "broken.json", "{ nope");
    let out = opalg().arg("separation").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line"), "parse errors carry a position: {stderr}");

    // Bad budgets.
    let cfg = write_config(
        &dir,
        "badbudget.json",
        r#"{"left": {"label": "A", "blocks": [2]},
            "right": {"label": "B", "blocks": [2]},
            "budgets": {"max_terms": 0}}"#,
    );
    let out = opalg().arg("certify").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Experiment mismatch between config and command line.
    let cfg = write_config(
        &dir,
        "mismatch.json",
        r#"{"left": {"label": "A", "blocks": [2]},
            "right": {"label": "B", "blocks": [2]},
            "experiment": "max-chsh"}"#,
    );
    let out = opalg().arg("separation").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unknown experiment name rejected by the argument parser.
    let cfg = write_config(&dir, "ok.json", BELL_PAIR);
    let out = opalg().arg("teleport").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_output_flattens_scalars() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "bell.json", BELL_PAIR);
    let out = opalg()
        .arg("counterexample")
        .arg("--config")
        .arg(&cfg)
        .arg("--format")
        .arg("csv")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "schema_version,experiment,seed,constructed,chsh_value"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("1.0.0,counterexample,11,true,"));
}

#[test]
fn seed_override_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "bell.json", BELL_PAIR);
    let out_path = dir.path().join("report.json");
    let out = opalg()
        .arg("max-chsh")
        .arg("--config")
        .arg(&cfg)
        .arg("--seed")
        .arg("99")
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = parse_report(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report.seed, 99);
    assert_eq!(report.schema_version, "1.0.0");
}

#[test]
fn certify_emits_reverifiable_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "sep.json", SEPARATED_PAIR);
    let out = opalg().arg("certify").arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let report = parse_report(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    match report.result {
        opalg_cli::report::ExperimentResult::Certify { outcome, .. } => match outcome {
            opalg_cli::report::CertifyVerdictWire::Decomposable { decomposition } => {
                assert!(decomposition.residual <= 1e-6);
                assert!(!decomposition.terms.is_empty());
            }
            other => panic!("commutative-factor state must decompose, got {other:?}"),
        },
        other => panic!("unexpected result {other:?}"),
    }
}

#[test]
fn representation_check_agrees_with_structure() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [("sep.json", SEPARATED_PAIR), ("bell.json", BELL_PAIR)] {
        let cfg = write_config(&dir, name, body);
        let out = opalg()
            .arg("representation-check")
            .arg("--config")
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success());
        let report = parse_report(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
        match report.result {
            opalg_cli::report::ExperimentResult::RepresentationCheck {
                matches,
                identity_factorization,
                representations,
                ..
            } => {
                assert!(matches);
                assert!(identity_factorization);
                assert!(representations.iter().all(|r| r.factorization));
            }
            other => panic!("unexpected result {other:?}"),
        }
    }
}
