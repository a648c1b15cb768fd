//! Constructive separation machinery: embed a copy of the 2×2 matrix
//! algebra into any noncommutative factor (through the Wedderburn corner or
//! through a noncommuting projection pair), build the maximally violating
//! Bohm-Bell state with its observables, and decide separation with an
//! explicit witness either way.

use num_complex::Complex64;

use crate::algebra::{
    conditional_expectation, generated_star_algebra, is_commutative, wedderburn_decompose,
    AlgebraElement, Form, MatrixAlgebra, DEFAULT_TOL,
};
use crate::chsh::{chsh_value, ChshObservables};
use crate::error::{Error, Result};
use crate::linalg::{eigh, kron_vec, top_eigenpair, CMat, CVec, C_ONE};
use crate::tensor::{tensor_product, vector_state, State, TensorAlgebra};

/// Tolerance at which the sixteen matrix-unit relations are enforced.
pub const UNIT_RELATION_TOL: f64 = 1e-9;

/// Matrix units e₁₁, e₁₂, e₂₁, e₂₂ of an embedded copy of M₂.
#[derive(Debug, Clone)]
pub struct MatrixUnits {
    pub e11: AlgebraElement,
    pub e12: AlgebraElement,
    pub e21: AlgebraElement,
    pub e22: AlgebraElement,
}

impl MatrixUnits {
    pub fn owner(&self) -> &MatrixAlgebra {
        self.e11.owner()
    }

    fn unit(&self, k: usize, l: usize) -> &AlgebraElement {
        match (k, l) {
            (0, 0) => &self.e11,
            (0, 1) => &self.e12,
            (1, 0) => &self.e21,
            (1, 1) => &self.e22,
            _ => unreachable!(),
        }
    }

    /// Checks all sixteen products e_{kl}·e_{mn} = δ_{lm}·e_{kn}, that
    /// e₁₁ + e₂₂ is a self-adjoint projection, and that e₁₂* = e₂₁.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for k in 0..2 {
            for l in 0..2 {
                for m in 0..2 {
                    for n in 0..2 {
                        let prod = self.unit(k, l) * self.unit(m, n);
                        let expected = if l == m {
                            self.unit(k, n).clone()
                        } else {
                            self.owner().zero_element()
                        };
                        let err = (&prod - &expected).op_norm();
                        if err > tol {
                            return Err(Error::ContractViolation(format!(
                                "unit relation e{}{}·e{}{} failed by {err:.3e}",
                                k + 1,
                                l + 1,
                                m + 1,
                                n + 1
                            )));
                        }
                    }
                }
            }
        }
        let corner = &self.e11 + &self.e22;
        if !corner.is_self_adjoint(tol) || (&(&corner * &corner) - &corner).op_norm() > tol {
            return Err(Error::ContractViolation(
                "e11 + e22 is not a self-adjoint projection".into(),
            ));
        }
        if (&self.e12.adjoint() - &self.e21).op_norm() > tol {
            return Err(Error::ContractViolation("e12* differs from e21".into()));
        }
        Ok(())
    }

    /// The Pauli pair of this corner: Z = e₁₁ − e₂₂ and X = e₁₂ + e₂₁.
    pub fn pauli_pair(&self) -> (AlgebraElement, AlgebraElement) {
        (&self.e11 - &self.e22, &self.e12 + &self.e21)
    }
}

/// Embeds M₂ into a noncommutative algebra: the Wedderburn decomposition
/// locates a block of size ≥ 2 and the canonical corner units of that block
/// are pulled back through the change of basis. Commutative algebras carry
/// no such copy and yield an error — exactly the separation obstruction.
pub fn embed_m2(a: &MatrixAlgebra, tol: f64) -> Result<MatrixUnits> {
    if is_commutative(a, tol) {
        return Err(Error::NoEmbedding(format!(
            "{} is commutative, no M2 subalgebra exists",
            a.label()
        )));
    }
    let data = wedderburn_decompose(a, tol.min(DEFAULT_TOL), 0x5eed_e2b2)?;
    let s = data
        .block_dims
        .iter()
        .position(|&n| n >= 2)
        .expect("noncommutative algebra has a block of size >= 2");

    let build = |k: usize, l: usize| -> Result<AlgebraElement> {
        let mut blocks: Vec<CMat> = data
            .block_dims
            .iter()
            .map(|&n| CMat::zeros(n, n))
            .collect();
        blocks[s][(k, l)] = C_ONE;
        match a.form() {
            Form::Canonical { block_dims } => {
                // The change of basis is a block permutation; place the
                // corner directly in the original block.
                let mut order: Vec<usize> = (0..block_dims.len()).collect();
                order.sort_by_key(|&i| (std::cmp::Reverse(block_dims[i]), i));
                let orig = order[s];
                let mut out: Vec<CMat> =
                    block_dims.iter().map(|&n| CMat::zeros(n, n)).collect();
                out[orig] = blocks[s].clone();
                AlgebraElement::from_blocks(a, out)
            }
            Form::Subalgebra { .. } => {
                let ambient = data.from_canonical_blocks(&blocks);
                AlgebraElement::from_ambient(a, &ambient, 1e-7)
            }
        }
    };

    let units = MatrixUnits {
        e11: build(0, 0)?,
        e12: build(0, 1)?,
        e21: build(1, 0)?,
        e22: build(1, 1)?,
    };
    units.validate(UNIT_RELATION_TOL)?;
    Ok(units)
}

/// Matrix units from a noncommuting projection pair, following the
/// two-projection geometry: an eigenvector v of PQP in range(P) at a generic
/// angle λ ∈ (tol, 1−tol) pairs with w ∝ (Q−λ)v to span the corner. The
/// units are checked to lie in the *-algebra generated by {P, Q}.
pub fn two_projection_units(
    p: &AlgebraElement,
    q: &AlgebraElement,
    tol: f64,
) -> Result<MatrixUnits> {
    let owner = p.owner().clone();
    if !owner.compatible(q.owner()) {
        return Err(Error::DomainMismatch(
            "projections live in different algebras".into(),
        ));
    }
    for (name, r) in [("P", p), ("Q", q)] {
        if !r.is_self_adjoint(1e-9) || (&(r * r) - r).op_norm() > 1e-9 {
            return Err(Error::ContractViolation(format!(
                "{name} is not a self-adjoint idempotent"
            )));
        }
    }
    let commutator = (&(p * q) - &(q * p)).op_norm();
    if commutator <= tol {
        return Err(Error::NoEmbedding(format!(
            "projections commute within tolerance (‖[P,Q]‖ = {commutator:.3e})"
        )));
    }

    let pm = p.ambient_matrix();
    let qm = q.ambient_matrix();
    let d = pm.nrows();

    // Orthonormal frame of range(P) from its spectral decomposition.
    let (pvals, pvecs) = eigh(&pm);
    let rank = pvals.iter().filter(|&&v| v > 0.5).count();
    let mut frame = CMat::zeros(d, rank);
    for c in 0..rank {
        frame.set_column(c, &pvecs.column(c));
    }

    // PQP compressed to range(P).
    let compressed = frame.adjoint() * &qm * &frame;
    let (angles, avecs) = eigh(&compressed);

    // Generic angles first: closest to 1/2 is numerically safest.
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&i, &j| {
        (angles[i] - 0.5)
            .abs()
            .partial_cmp(&(angles[j] - 0.5).abs())
            .unwrap()
    });

    let generated = generated_star_algebra(d, &[pm.clone(), qm.clone()], DEFAULT_TOL)?;
    let mut last_err = Error::NoEmbedding(
        "no generic eigenvalue: every angle of PQP is 0 or 1 within tolerance".into(),
    );

    for &idx in &order {
        let lambda = angles[idx];
        if lambda <= tol || lambda >= 1.0 - tol {
            continue;
        }
        let v: CVec = &frame * avecs.column(idx).clone_owned();
        let mut w: CVec = &qm * &v - v.scale(lambda);
        let wnorm = w.norm();
        if wnorm < tol {
            continue;
        }
        w = w.unscale(wnorm);

        let make = |x: &CVec, y: &CVec| -> CMat { x * y.adjoint() };
        let candidates = [
            make(&v, &v),
            make(&v, &w),
            make(&w, &v),
            make(&w, &w),
        ];

        // Membership in the generated algebra via conditional expectation.
        let mut member = true;
        for c in &candidates {
            let e = conditional_expectation(c, &generated)?;
            if (&e.ambient_matrix() - c).norm() > tol.max(1e-8) {
                member = false;
                break;
            }
        }
        if !member {
            last_err = Error::NoEmbedding(format!(
                "units at angle {lambda:.6} fall outside the generated algebra (degenerate angle)"
            ));
            continue;
        }

        let to_elem = |m: &CMat| AlgebraElement::from_ambient(&owner, m, 1e-7);
        let units = MatrixUnits {
            e11: to_elem(&candidates[0])?,
            e12: to_elem(&candidates[1])?,
            e21: to_elem(&candidates[2])?,
            e22: to_elem(&candidates[3])?,
        };
        units.validate(UNIT_RELATION_TOL)?;
        return Ok(units);
    }
    Err(last_err)
}

/// The CHSH-optimal quadruple for the Bohm-Bell state of the two corners:
/// A = Z_L, A′ = X_L, B = (Z_R + X_R)/√2, B′ = (X_R − Z_R)/√2. All four are
/// self-adjoint contractions supported on the unit corners.
pub fn tsirelson_observables(
    t: &TensorAlgebra,
    left: &MatrixUnits,
    right: &MatrixUnits,
) -> Result<ChshObservables> {
    if !left.owner().compatible(t.left()) || !right.owner().compatible(t.right()) {
        return Err(Error::DomainMismatch(
            "matrix units do not live in the tensor factors".into(),
        ));
    }
    let (zl, xl) = left.pauli_pair();
    let (zr, xr) = right.pauli_pair();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ChshObservables::new(
        zl,
        xl,
        (&zr + &xr).scale(s),
        (&xr - &zr).scale(s),
    )
}

/// Extracts (block index, u₁, u₂) from corner units of a canonical algebra:
/// e₁₁ = u₁u₁†, e₂₂ = u₂u₂† with u₂ = e₂₁u₁.
fn corner_frame(units: &MatrixUnits) -> Result<(usize, CVec, CVec)> {
    let owner = units.owner();
    if !owner.is_canonical() {
        return Err(Error::DomainMismatch(
            "corner extraction requires a canonical factor".into(),
        ));
    }
    let blocks = units.e11.blocks();
    let mut found: Option<usize> = None;
    for (b, m) in blocks.iter().enumerate() {
        if m.norm() > 0.5 {
            if found.is_some() {
                return Err(Error::ContractViolation(
                    "corner projection straddles blocks".into(),
                ));
            }
            found = Some(b);
        }
    }
    let b = found.ok_or_else(|| Error::ContractViolation("corner projection vanishes".into()))?;
    let (lam, u1) = top_eigenpair(units.e11.block(b));
    if (lam - 1.0).abs() > 1e-8 {
        return Err(Error::ContractViolation(format!(
            "e11 block is not a rank-1 projection (top eigenvalue {lam})"
        )));
    }
    let u2: CVec = units.e21.block(b) * &u1;
    if (u2.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::ContractViolation(
            "e21 does not map the corner vector isometrically".into(),
        ));
    }
    Ok((b, u1, u2))
}

/// The singlet vector state (u₁⊗v₂ − u₂⊗v₁)/√2 on the product block that
/// holds the two corners. Together with [`tsirelson_observables`] it
/// achieves the CHSH value 2√2.
pub fn bohm_bell_state(
    t: &TensorAlgebra,
    left: &MatrixUnits,
    right: &MatrixUnits,
) -> Result<State> {
    if !left.owner().compatible(t.left()) || !right.owner().compatible(t.right()) {
        return Err(Error::DomainMismatch(
            "matrix units do not live in the tensor factors".into(),
        ));
    }
    let (bi, u1, u2) = corner_frame(left)?;
    let (bj, v1, v2) = corner_frame(right)?;
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let psi = kron_vec(&u1, &v2) * s - kron_vec(&u2, &v1) * s;
    let block = t.pair_block(bi, bj);
    let (state, _) = vector_state(t.product(), block, &psi)?;
    Ok(state)
}

/// Separation verdict with a constructive refutation in the noncommutative
/// case: embedded corners on both sides, the Bohm-Bell state, its optimal
/// observables, and the recomputed CHSH value above 2.
#[derive(Debug, Clone)]
pub enum SeparationVerdict {
    Separated,
    NotSeparated(Box<BellWitness>),
}

#[derive(Debug, Clone)]
pub struct BellWitness {
    pub tensor: TensorAlgebra,
    pub left_units: MatrixUnits,
    pub right_units: MatrixUnits,
    pub observables: ChshObservables,
    pub state: State,
    pub chsh: f64,
}

impl SeparationVerdict {
    pub fn is_separated(&self) -> bool {
        matches!(self, SeparationVerdict::Separated)
    }
}

/// A₁ ⊗ A₂ is separated iff A₁ or A₂ is commutative. When both are
/// noncommutative the attached witness state violates the CHSH bound at
/// 2√2, refuting every Bell inequality certificate at once.
pub fn is_separated(a1: &MatrixAlgebra, a2: &MatrixAlgebra) -> Result<SeparationVerdict> {
    if is_commutative(a1, DEFAULT_TOL) || is_commutative(a2, DEFAULT_TOL) {
        return Ok(SeparationVerdict::Separated);
    }
    let t = tensor_product(a1, a2)?;
    let left_units = embed_m2(t.left(), DEFAULT_TOL)?;
    let right_units = embed_m2(t.right(), DEFAULT_TOL)?;
    let observables = tsirelson_observables(&t, &left_units, &right_units)?;
    let state = bohm_bell_state(&t, &left_units, &right_units)?;
    let chsh = chsh_value(&state, &t, &observables)?;
    Ok(SeparationVerdict::NotSeparated(Box::new(BellWitness {
        tensor: t,
        left_units,
        right_units,
        observables,
        state,
        chsh,
    })))
}
