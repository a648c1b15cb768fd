//! Experiment dispatch. Verdicts are data in the report, never exit codes;
//! witnesses are re-verified from their serialized form before anything is
//! written.

use anyhow::{anyhow, bail, Context};

use opalg_core::algebra::MatrixAlgebra;
use opalg_core::chsh::{chsh_value, seesaw_global};
use opalg_core::embed::{
    bohm_bell_state, embed_m2, is_separated, tsirelson_observables, MatrixUnits,
    SeparationVerdict,
};
use opalg_core::gns::{
    check_tensor_factorization, irreducible_representations, separated_in_representation,
    Representation,
};
use opalg_core::sep::{certify_state, ppt_check, Certificate, CertifyBudgets};
use opalg_core::tensor::{random_state, tensor_product, State, TensorAlgebra};
use opalg_core::wire::{
    ChshObservablesWire, ChshReportWire, ElementWire, StateWire, TensorAlgebraWire,
};

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind};
use crate::report::{
    parse_report, CertifyVerdictWire, ExperimentResult, Report, RepresentationRow, UnitsWire,
    WitnessWire, REPORT_SCHEMA_VERSION,
};

/// A validated experiment ready to execute.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub left: MatrixAlgebra,
    pub right: MatrixAlgebra,
    pub tensor: TensorAlgebra,
    pub certify_input: Option<State>,
}

/// Builds the algebras and resolves the seed; every failure here is a
/// configuration error (exit code 2).
pub fn prepare(
    config: ExperimentConfig,
    experiment: ExperimentKind,
    seed_override: Option<u64>,
) -> Result<Prepared, ConfigError> {
    if let Some(declared) = config.experiment {
        if declared != experiment {
            return Err(ConfigError::Invalid(format!(
                "config declares experiment '{}' but '{}' was requested",
                declared.as_str(),
                experiment.as_str()
            )));
        }
    }
    let tol = config.budgets.algebra_tol;
    let left = config
        .left
        .to_algebra(tol)
        .map_err(|e| ConfigError::Invalid(format!("left algebra: {e}")))?;
    let right = config
        .right
        .to_algebra(tol)
        .map_err(|e| ConfigError::Invalid(format!("right algebra: {e}")))?;
    let tensor = tensor_product(&left, &right)
        .map_err(|e| ConfigError::Invalid(format!("tensor product: {e}")))?;
    let certify_input = match &config.state {
        Some(wire) => Some(
            wire.to_state(tensor.product())
                .map_err(|e| ConfigError::Invalid(format!("input state: {e}")))?,
        ),
        None => None,
    };
    let seed = seed_override.unwrap_or(config.seed);
    Ok(Prepared {
        config,
        experiment,
        seed,
        left,
        right,
        tensor,
        certify_input,
    })
}

fn units_wire(u: &MatrixUnits) -> UnitsWire {
    UnitsWire {
        e11: ElementWire::from_element(&u.e11),
        e12: ElementWire::from_element(&u.e12),
        e21: ElementWire::from_element(&u.e21),
        e22: ElementWire::from_element(&u.e22),
    }
}

fn witness_wire(
    t: &TensorAlgebra,
    left_units: &MatrixUnits,
    right_units: &MatrixUnits,
    state: &State,
    value: f64,
) -> anyhow::Result<WitnessWire> {
    let observables = tsirelson_observables(t, left_units, right_units)?;
    Ok(WitnessWire {
        left_units: units_wire(left_units),
        right_units: units_wire(right_units),
        observables: ChshObservablesWire::from_observables(&observables),
        state: StateWire::from_state(state),
        chsh_value: value,
    })
}

/// Runs the experiment and assembles the report envelope.
pub fn execute(p: &Prepared) -> anyhow::Result<Report> {
    let result = match p.experiment {
        ExperimentKind::Separation => run_separation(p)?,
        ExperimentKind::MaxChsh => run_max_chsh(p)?,
        ExperimentKind::Certify => run_certify(p)?,
        ExperimentKind::Counterexample => run_counterexample(p)?,
        ExperimentKind::RepresentationCheck => run_representation_check(p)?,
    };
    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        experiment: p.experiment,
        seed: p.seed,
        left: p.config.left.clone(),
        right: p.config.right.clone(),
        tensor: TensorAlgebraWire::from_tensor(&p.tensor),
        result,
    })
}

fn run_separation(p: &Prepared) -> anyhow::Result<ExperimentResult> {
    match is_separated(&p.left, &p.right)? {
        SeparationVerdict::Separated => Ok(ExperimentResult::Separation {
            separated: true,
            witness: None,
        }),
        SeparationVerdict::NotSeparated(w) => Ok(ExperimentResult::Separation {
            separated: false,
            witness: Some(witness_wire(
                &w.tensor,
                &w.left_units,
                &w.right_units,
                &w.state,
                w.chsh,
            )?),
        }),
    }
}

fn run_max_chsh(p: &Prepared) -> anyhow::Result<ExperimentResult> {
    let b = &p.config.budgets;
    let out = seesaw_global(&p.tensor, p.seed, b.restarts, b.max_iter, b.seesaw_tol)?;
    Ok(ExperimentResult::MaxChsh {
        report: ChshReportWire::from_report(&out.report),
        state: StateWire::from_state(&out.state),
    })
}

fn run_certify(p: &Prepared) -> anyhow::Result<ExperimentResult> {
    let omega = match &p.certify_input {
        Some(s) => s.clone(),
        None => random_state(p.tensor.product(), p.seed),
    };
    let b = &p.config.budgets;
    let budgets = CertifyBudgets {
        restarts: b.restarts,
        max_iter: b.max_iter,
        max_terms: b.max_terms,
        seesaw_tol: b.seesaw_tol,
        decomp_tol: b.decomp_tol,
    };
    let (_, ppt_min) = ppt_check(&omega, &p.tensor)?;
    let outcome = match certify_state(&omega, &p.tensor, &budgets, p.seed)? {
        Certificate::Decomposable(d) => CertifyVerdictWire::Decomposable {
            decomposition: opalg_core::wire::DecompositionWire::from_decomposition(&d),
        },
        Certificate::NotDecomposable {
            ppt_min_eigenvalue,
            chsh,
        } => CertifyVerdictWire::NotDecomposable {
            ppt_min_eigenvalue,
            chsh: chsh.as_ref().map(|r| ChshReportWire::from_report(r)),
        },
        Certificate::Undecided { best_residual } => {
            CertifyVerdictWire::Undecided { best_residual }
        }
    };
    Ok(ExperimentResult::Certify {
        state: StateWire::from_state(&omega),
        ppt_min_eigenvalue: ppt_min,
        outcome,
    })
}

fn run_counterexample(p: &Prepared) -> anyhow::Result<ExperimentResult> {
    let tol = p.config.budgets.algebra_tol;
    let left_units = match embed_m2(p.tensor.left(), tol) {
        Ok(u) => u,
        Err(e) => {
            return Ok(ExperimentResult::Counterexample {
                constructed: false,
                reason: Some(format!("left factor: {e}")),
                witness: None,
            })
        }
    };
    let right_units = match embed_m2(p.tensor.right(), tol) {
        Ok(u) => u,
        Err(e) => {
            return Ok(ExperimentResult::Counterexample {
                constructed: false,
                reason: Some(format!("right factor: {e}")),
                witness: None,
            })
        }
    };
    let state = bohm_bell_state(&p.tensor, &left_units, &right_units)?;
    let observables = tsirelson_observables(&p.tensor, &left_units, &right_units)?;
    let value = chsh_value(&state, &p.tensor, &observables)?;
    Ok(ExperimentResult::Counterexample {
        constructed: true,
        reason: None,
        witness: Some(witness_wire(
            &p.tensor,
            &left_units,
            &right_units,
            &state,
            value,
        )?),
    })
}

fn run_representation_check(p: &Prepared) -> anyhow::Result<ExperimentResult> {
    let t = &p.tensor;
    let tol = p.config.budgets.algebra_tol;
    let reps = irreducible_representations(t.product())?;
    let mut rows = Vec::with_capacity(reps.len());
    let mut conjunction = true;
    for (block, pi) in reps.iter().enumerate() {
        let separated = separated_in_representation(pi, t, tol)?;
        let factorization = check_tensor_factorization(pi, t, p.config.budgets.product_tol)?;
        conjunction &= separated;
        rows.push(RepresentationRow {
            block,
            carrier_dim: pi.carrier_dim(),
            separated,
            factorization,
        });
    }
    let identity_factorization = check_tensor_factorization(
        &Representation::identity(t.product()),
        t,
        p.config.budgets.product_tol,
    )?;
    let separated = is_separated(&p.left, &p.right)?.is_separated();
    Ok(ExperimentResult::RepresentationCheck {
        separated,
        conjunction,
        matches: separated == conjunction,
        identity_factorization,
        representations: rows,
    })
}

/// Re-verifies every witness in a serialized report by rebuilding the
/// objects from the JSON text and recomputing the claimed quantities.
/// Reports that fail to reproduce are never written.
pub fn verify_serialized_report(json: &str, p: &Prepared) -> anyhow::Result<()> {
    let report = parse_report(json).context("re-parsing emitted report")?;
    let t = &p.tensor;
    match &report.result {
        ExperimentResult::Separation { witness, .. }
        | ExperimentResult::Counterexample { witness, .. } => {
            if let Some(w) = witness {
                let state = w.state.to_state(t.product())?;
                let obs = w.observables.to_observables(t)?;
                let recomputed = chsh_value(&state, t, &obs)?;
                if (recomputed - w.chsh_value).abs() > 1e-9 {
                    bail!(
                        "witness does not reproduce: claimed {} recomputed {recomputed}",
                        w.chsh_value
                    );
                }
            }
        }
        ExperimentResult::MaxChsh { report: r, state } => {
            let omega = state.to_state(t.product())?;
            let obs = r.observables.to_observables(t)?;
            let recomputed = chsh_value(&omega, t, &obs)?;
            if (recomputed - r.value).abs() > 1e-9 {
                bail!(
                    "see-saw report does not reproduce: claimed {} recomputed {recomputed}",
                    r.value
                );
            }
        }
        ExperimentResult::Certify { state, outcome, .. } => {
            let omega = state.to_state(t.product())?;
            match outcome {
                CertifyVerdictWire::Decomposable { decomposition } => {
                    let d = decomposition.to_decomposition(t)?;
                    let residual = d.verify_residual(&omega, t)?;
                    if residual > decomposition.residual + 1e-9 {
                        bail!(
                            "decomposition does not reproduce: claimed residual {} recomputed {residual}",
                            decomposition.residual
                        );
                    }
                }
                CertifyVerdictWire::NotDecomposable { chsh, .. } => {
                    if let Some(r) = chsh {
                        let obs = r.observables.to_observables(t)?;
                        let recomputed = chsh_value(&omega, t, &obs)?;
                        if (recomputed - r.value).abs() > 1e-9 {
                            bail!(
                                "CHSH witness does not reproduce: claimed {} recomputed {recomputed}",
                                r.value
                            );
                        }
                    }
                }
                CertifyVerdictWire::Undecided { .. } => {}
            }
        }
        ExperimentResult::RepresentationCheck { matches, .. } => {
            if !matches {
                bail!("representation check disagrees with the structural verdict");
            }
        }
    }
    Ok(())
}

/// End-to-end: execute, serialize, verify the serialized form, and return
/// the exact bytes to emit.
pub fn run_to_json(p: &Prepared) -> anyhow::Result<(Report, String)> {
    let report = execute(p)?;
    let json = report.to_json();
    verify_serialized_report(&json, p)
        .map_err(|e| anyhow!("refusing to emit non-reproducing report: {e}"))?;
    Ok((report, json))
}
