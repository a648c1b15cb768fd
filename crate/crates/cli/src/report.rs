//! Report schema: a versioned envelope around per-experiment results, with
//! JSON as the primary format and a flattened scalar CSV. Witness payloads
//! carry full matrices so external checkers can recompute the claims.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use opalg_core::wire::{
    AlgebraWire, ChshObservablesWire, ChshReportWire, DecompositionWire, ElementWire, StateWire,
    TensorAlgebraWire,
};

use crate::config::ExperimentKind;

pub const REPORT_SCHEMA_VERSION: &str = "1.0.0";

/// The schema version embedded in every report.
pub fn report_schema_version() -> &'static str {
    REPORT_SCHEMA_VERSION
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema version {found}: this parser handles major version {expected}")]
    VersionMismatch { found: String, expected: u64 },
}

/// Matrix units of an embedded M₂ copy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitsWire {
    pub e11: ElementWire,
    pub e12: ElementWire,
    pub e21: ElementWire,
    pub e22: ElementWire,
}

/// A Bell-violation witness bundle: enough data to recompute the CHSH value
/// without this tool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessWire {
    pub left_units: UnitsWire,
    pub right_units: UnitsWire,
    pub observables: ChshObservablesWire,
    pub state: StateWire,
    pub chsh_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum CertifyVerdictWire {
    Decomposable {
        decomposition: DecompositionWire,
    },
    NotDecomposable {
        ppt_min_eigenvalue: f64,
        chsh: Option<ChshReportWire>,
    },
    Undecided {
        best_residual: f64,
    },
}

/// One irreducible representation row of the representation-check suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentationRow {
    pub block: usize,
    pub carrier_dim: usize,
    pub separated: bool,
    pub factorization: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentResult {
    Separation {
        separated: bool,
        witness: Option<WitnessWire>,
    },
    MaxChsh {
        report: ChshReportWire,
        state: StateWire,
    },
    Certify {
        state: StateWire,
        ppt_min_eigenvalue: f64,
        outcome: CertifyVerdictWire,
    },
    Counterexample {
        constructed: bool,
        reason: Option<String>,
        witness: Option<WitnessWire>,
    },
    RepresentationCheck {
        separated: bool,
        conjunction: bool,
        matches: bool,
        identity_factorization: bool,
        representations: Vec<RepresentationRow>,
    },
}

/// The versioned report envelope. The tensor section records the product
/// block sizes and the pair-index table so block references in the result
/// resolve without this tool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub left: AlgebraWire,
    pub right: AlgebraWire,
    pub tensor: TensorAlgebraWire,
    pub result: ExperimentResult,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Parses a report, rejecting major-version mismatches before attempting a
/// structural decode.
pub fn parse_report(json: &str) -> Result<Report, ReportError> {
    let value: serde_json::Value = serde_json::from_str(json).map_err(|e| ReportError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_str())
        .unwrap_or("")
        .to_string();
    let major = found.split('.').next().and_then(|s| s.parse::<u64>().ok());
    if major != Some(1) {
        return Err(ReportError::VersionMismatch { found, expected: 1 });
    }
    serde_json::from_value(value).map_err(|e| ReportError::Parse {
        line: 0,
        column: 0,
        message: e.to_string(),
    })
}

/// Flattens the scalar summary fields to a one-row CSV. Full witnesses are
/// JSON-only.
pub fn to_csv(report: &Report) -> String {
    let mut fields: Vec<(&str, String)> = vec![
        ("schema_version", report.schema_version.clone()),
        ("experiment", report.experiment.as_str().to_string()),
        ("seed", report.seed.to_string()),
    ];
    match &report.result {
        ExperimentResult::Separation { separated, witness } => {
            fields.push(("separated", separated.to_string()));
            fields.push((
                "chsh_value",
                witness
                    .as_ref()
                    .map(|w| format!("{:.17e}", w.chsh_value))
                    .unwrap_or_default(),
            ));
        }
        ExperimentResult::MaxChsh { report: r, .. } => {
            fields.push(("value", format!("{:.17e}", r.value)));
            fields.push(("converged", r.converged.to_string()));
            fields.push(("iterations", r.iterations.to_string()));
            fields.push(("restarts_used", r.restarts_used.to_string()));
        }
        ExperimentResult::Certify {
            ppt_min_eigenvalue,
            outcome,
            ..
        } => {
            fields.push(("ppt_min_eigenvalue", format!("{ppt_min_eigenvalue:.17e}")));
            match outcome {
                CertifyVerdictWire::Decomposable { decomposition } => {
                    fields.push(("verdict", "decomposable".into()));
                    fields.push(("terms", decomposition.terms.len().to_string()));
                    fields.push(("residual", format!("{:.17e}", decomposition.residual)));
                }
                CertifyVerdictWire::NotDecomposable { chsh, .. } => {
                    fields.push(("verdict", "not-decomposable".into()));
                    fields.push((
                        "chsh_value",
                        chsh.as_ref()
                            .map(|c| format!("{:.17e}", c.value))
                            .unwrap_or_default(),
                    ));
                }
                CertifyVerdictWire::Undecided { best_residual } => {
                    fields.push(("verdict", "undecided".into()));
                    fields.push(("residual", format!("{best_residual:.17e}")));
                }
            }
        }
        ExperimentResult::Counterexample {
            constructed,
            witness,
            ..
        } => {
            fields.push(("constructed", constructed.to_string()));
            fields.push((
                "chsh_value",
                witness
                    .as_ref()
                    .map(|w| format!("{:.17e}", w.chsh_value))
                    .unwrap_or_default(),
            ));
        }
        ExperimentResult::RepresentationCheck {
            separated,
            conjunction,
            matches,
            identity_factorization,
            representations,
        } => {
            fields.push(("separated", separated.to_string()));
            fields.push(("conjunction", conjunction.to_string()));
            fields.push(("matches", matches.to_string()));
            fields.push(("identity_factorization", identity_factorization.to_string()));
            fields.push(("representations", representations.len().to_string()));
        }
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(fields.iter().map(|(k, _)| *k))
        .expect("csv header");
    writer
        .write_record(fields.iter().map(|(_, v)| v.as_str()))
        .expect("csv record");
    String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv utf8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> Report {
        Report {
            schema_version: REPORT_SCHEMA_VERSION.into(),
            experiment: ExperimentKind::Separation,
            seed: 3,
            left: AlgebraWire::Canonical {
                label: "A".into(),
                blocks: vec![1, 1],
            },
            right: AlgebraWire::Canonical {
                label: "B".into(),
                blocks: vec![2],
            },
            tensor: TensorAlgebraWire {
                left_label: "A".into(),
                right_label: "B".into(),
                product_blocks: vec![2, 2],
                pair_index: vec![(0, 0), (1, 0)],
            },
            result: ExperimentResult::Separation {
                separated: true,
                witness: None,
            },
        }
    }

    #[test]
    fn round_trip_and_version_gate() {
        let report = sample_report();
        let json = report.to_json();
        let parsed = parse_report(&json).unwrap();
        assert_eq!(parsed.schema_version, REPORT_SCHEMA_VERSION);

        let newer = json.replace("\"1.0.0\"", "\"2.3.1\"");
        match parse_report(&newer) {
            Err(ReportError::VersionMismatch { found, .. }) => assert_eq!(found, "2.3.1"),
            other => panic!("expected version mismatch, got {other:?}"),
        }
    }

    #[test]
    fn csv_flattens_scalars_only() {
        let csv = to_csv(&sample_report());
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "schema_version,experiment,seed,separated,chsh_value"
        );
        assert_eq!(lines.next().unwrap(), "1.0.0,separation,3,true,");
    }
}
