//! Tensor products of multi-matrix algebras and states as block density
//! data: reduced states, purity, the product-state predicate, and seeded
//! samplers.

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{wedderburn_decompose, AlgebraElement, Form, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{
    child_seed, eigh, gaussian_matrix, gaussian_vector, kron, partial_trace_left,
    partial_trace_right, rng_from, CMat, CVec, C_ZERO,
};

/// Absolute tolerance for state positivity / normalization checks.
pub const STATE_TOL: f64 = 1e-10;

/// Default entrywise tolerance of the product-state test.
pub const PRODUCT_TOL: f64 = 1e-8;

/// Which factor of a tensor product to keep when reducing a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A tensor product A₁ ⊗ A₂ of canonical multi-matrix algebras. The product
/// block at pair (i, j) is the Kronecker block of size nᵢ·mⱼ, ordered
/// lexicographically by (i, j).
#[derive(Debug, Clone)]
pub struct TensorAlgebra {
    left: MatrixAlgebra,
    right: MatrixAlgebra,
    product: MatrixAlgebra,
    pairs: Vec<(usize, usize)>,
}

/// Forms the tensor product. Subalgebra-form factors are canonicalized via
/// their Wedderburn decomposition first.
pub fn tensor_product(a1: &MatrixAlgebra, a2: &MatrixAlgebra) -> Result<TensorAlgebra> {
    let left = canonicalize(a1)?;
    let right = canonicalize(a2)?;
    let ldims = left.block_dims().unwrap().to_vec();
    let rdims = right.block_dims().unwrap().to_vec();
    let mut prod_dims = Vec::with_capacity(ldims.len() * rdims.len());
    let mut pairs = Vec::with_capacity(ldims.len() * rdims.len());
    for (i, &n) in ldims.iter().enumerate() {
        for (j, &m) in rdims.iter().enumerate() {
            prod_dims.push(n * m);
            pairs.push((i, j));
        }
    }
    let product = MatrixAlgebra::canonical(
        format!("{}⊗{}", left.label(), right.label()),
        &prod_dims,
    )?;
    Ok(TensorAlgebra {
        left,
        right,
        product,
        pairs,
    })
}

fn canonicalize(a: &MatrixAlgebra) -> Result<MatrixAlgebra> {
    match a.form() {
        Form::Canonical { .. } => Ok(a.clone()),
        Form::Subalgebra { .. } => {
            let data = wedderburn_decompose(a, crate::algebra::DEFAULT_TOL, 0x7ab1_c04e)?;
            data.canonical_algebra(a.label().to_string())
        }
    }
}

impl TensorAlgebra {
    pub fn left(&self) -> &MatrixAlgebra {
        &self.left
    }

    pub fn right(&self) -> &MatrixAlgebra {
        &self.right
    }

    pub fn product(&self) -> &MatrixAlgebra {
        &self.product
    }

    /// Product block index of the factor-block pair (i, j).
    pub fn pair_block(&self, i: usize, j: usize) -> usize {
        i * self.right.num_blocks() + j
    }

    /// Factor-block pair of a product block.
    pub fn block_pair(&self, p: usize) -> (usize, usize) {
        self.pairs[p]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// x ↦ x ⊗ 1.
    pub fn embed_left(&self, x: &AlgebraElement) -> AlgebraElement {
        assert!(
            self.left.compatible(x.owner()),
            "embed_left of a foreign element"
        );
        let rdims = self.right.block_dims().unwrap();
        let blocks = self
            .pairs
            .iter()
            .map(|&(i, j)| kron(x.block(i), &CMat::identity(rdims[j], rdims[j])))
            .collect();
        AlgebraElement::from_blocks(&self.product, blocks).unwrap()
    }

    /// y ↦ 1 ⊗ y.
    pub fn embed_right(&self, y: &AlgebraElement) -> AlgebraElement {
        assert!(
            self.right.compatible(y.owner()),
            "embed_right of a foreign element"
        );
        let ldims = self.left.block_dims().unwrap();
        let blocks = self
            .pairs
            .iter()
            .map(|&(i, j)| kron(&CMat::identity(ldims[i], ldims[i]), y.block(j)))
            .collect();
        AlgebraElement::from_blocks(&self.product, blocks).unwrap()
    }

    /// x ⊗ y, blockwise Kronecker products.
    pub fn embed_pair(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        assert!(self.left.compatible(x.owner()) && self.right.compatible(y.owner()));
        let blocks = self
            .pairs
            .iter()
            .map(|&(i, j)| kron(x.block(i), y.block(j)))
            .collect();
        AlgebraElement::from_blocks(&self.product, blocks).unwrap()
    }
}

/// A state: block weights (a probability vector) plus a unit-trace positive
/// density matrix on every block carrying weight.
#[derive(Debug, Clone)]
pub struct State {
    owner: MatrixAlgebra,
    weights: Vec<f64>,
    densities: Vec<Option<CMat>>,
}

impl State {
    /// Validates weights (nonnegative, sum 1) and densities (self-adjoint,
    /// PSD, unit trace, all within [`STATE_TOL`]).
    pub fn new(
        owner: &MatrixAlgebra,
        weights: Vec<f64>,
        densities: Vec<Option<CMat>>,
    ) -> Result<Self> {
        let dims = owner
            .block_dims()
            .ok_or_else(|| Error::InvalidState("states require a canonical algebra".into()))?;
        if weights.len() != dims.len() || densities.len() != dims.len() {
            return Err(Error::InvalidState(format!(
                "expected {} blocks, got {} weights / {} densities",
                dims.len(),
                weights.len(),
                densities.len()
            )));
        }
        let mut total = 0.0;
        for (b, &w) in weights.iter().enumerate() {
            if w < -STATE_TOL {
                return Err(Error::InvalidState(format!("weight {b} is negative: {w}")));
            }
            total += w;
            match (&densities[b], w > 0.0) {
                (None, true) => {
                    return Err(Error::InvalidState(format!(
                        "block {b} carries weight {w} but no density"
                    )))
                }
                (Some(rho), _) => {
                    let n = dims[b];
                    if rho.nrows() != n || rho.ncols() != n {
                        return Err(Error::InvalidState(format!(
                            "density {b} must be {n}×{n}"
                        )));
                    }
                    if (rho - rho.adjoint()).norm() > STATE_TOL {
                        return Err(Error::InvalidState(format!(
                            "density {b} is not self-adjoint"
                        )));
                    }
                    if (rho.trace().re - 1.0).abs() > STATE_TOL
                        || rho.trace().im.abs() > STATE_TOL
                    {
                        return Err(Error::InvalidState(format!(
                            "density {b} does not have unit trace"
                        )));
                    }
                    let (vals, _) = eigh(rho);
                    if let Some(&min) = vals.last() {
                        if min < -STATE_TOL {
                            return Err(Error::InvalidState(format!(
                                "density {b} has negative eigenvalue {min:.3e}"
                            )));
                        }
                    }
                }
                (None, false) => {}
            }
        }
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            owner: owner.clone(),
            weights,
            densities,
        })
    }

    pub fn owner(&self) -> &MatrixAlgebra {
        &self.owner
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn density(&self, block: usize) -> Option<&CMat> {
        self.densities[block].as_ref()
    }

    /// ω(x) = Σᵢ wᵢ·tr(ρᵢ·xᵢ).
    pub fn evaluate(&self, x: &AlgebraElement) -> Result<Complex64> {
        if !self.owner.compatible(x.owner()) {
            return Err(Error::DomainMismatch(
                "state and element live on different algebras".into(),
            ));
        }
        let mut acc = C_ZERO;
        for (b, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let rho = self.densities[b].as_ref().unwrap();
            acc += (rho * x.block(b)).trace() * Complex64::new(w, 0.0);
        }
        Ok(acc)
    }

    /// The ambient block-diagonal density ⊕ᵢ wᵢρᵢ implementing the state in
    /// the trace pairing.
    pub fn full_density(&self) -> CMat {
        let d = self.owner.ambient_dim();
        let dims = self.owner.block_dims().unwrap();
        let mut out = CMat::zeros(d, d);
        let mut off = 0;
        for (b, &n) in dims.iter().enumerate() {
            if let (w, Some(rho)) = (self.weights[b], &self.densities[b]) {
                if w > 0.0 {
                    out.view_mut((off, off), (n, n))
                        .copy_from(&rho.scale(w));
                }
            }
            off += n;
        }
        out
    }

    /// Convex mixture of states on a common algebra.
    pub fn mixture(terms: &[(f64, State)]) -> Result<State> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let owner = first.owner.clone();
        let dims = owner.block_dims().unwrap().to_vec();
        let mut weights = vec![0.0; dims.len()];
        let mut accum: Vec<CMat> = dims.iter().map(|&n| CMat::zeros(n, n)).collect();
        let mut lambda_total = 0.0;
        for (lambda, s) in terms {
            if *lambda < 0.0 {
                return Err(Error::InvalidState("negative mixture weight".into()));
            }
            if !owner.compatible(&s.owner) {
                return Err(Error::DomainMismatch(
                    "mixture across different algebras".into(),
                ));
            }
            lambda_total += lambda;
            for b in 0..dims.len() {
                let w = s.weights[b];
                if w > 0.0 {
                    weights[b] += lambda * w;
                    accum[b] += s.densities[b].as_ref().unwrap().scale(lambda * w);
                }
            }
        }
        if (lambda_total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "mixture weights sum to {lambda_total}"
            )));
        }
        let densities = accum
            .into_iter()
            .zip(&weights)
            .map(|(m, &w)| if w > 0.0 { Some(m.unscale(w)) } else { None })
            .collect();
        State::new(&owner, weights, densities)
    }
}

/// The vector state ⟨v, · v⟩ supported on one block. Vectors within 1e−6 of
/// unit norm are normalized (the second return value flags this); anything
/// farther off is an error.
pub fn vector_state(
    owner: &MatrixAlgebra,
    block: usize,
    v: &CVec,
) -> Result<(State, bool)> {
    let dims = owner
        .block_dims()
        .ok_or_else(|| Error::InvalidState("states require a canonical algebra".into()))?;
    if block >= dims.len() {
        return Err(Error::DomainMismatch(format!(
            "block {block} out of range ({} blocks)",
            dims.len()
        )));
    }
    if v.len() != dims[block] {
        return Err(Error::DomainMismatch(format!(
            "vector length {} does not match block dimension {}",
            v.len(),
            dims[block]
        )));
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidState(format!(
            "vector norm {norm} is too far from 1"
        )));
    }
    let renormalized = (norm - 1.0).abs() > 1e-12;
    let u = v.unscale(norm);
    let mut weights = vec![0.0; dims.len()];
    weights[block] = 1.0;
    let mut densities: Vec<Option<CMat>> = vec![None; dims.len()];
    densities[block] = Some(&u * u.adjoint());
    Ok((State::new(owner, weights, densities)?, renormalized))
}

/// Restriction of a product-algebra state to one factor: partial traces of
/// the block densities, mixed along the other factor's index.
pub fn reduced_state(omega: &State, t: &TensorAlgebra, side: Side) -> Result<State> {
    if !omega.owner().compatible(t.product()) {
        return Err(Error::DomainMismatch(
            "state does not live on the product algebra".into(),
        ));
    }
    let ldims = t.left().block_dims().unwrap();
    let rdims = t.right().block_dims().unwrap();
    let (kept, kept_dims): (&MatrixAlgebra, &[usize]) = match side {
        Side::Left => (t.left(), ldims),
        Side::Right => (t.right(), rdims),
    };
    let mut weights = vec![0.0; kept_dims.len()];
    let mut accum: Vec<CMat> = kept_dims.iter().map(|&n| CMat::zeros(n, n)).collect();
    for (p, &(i, j)) in t.pairs().iter().enumerate() {
        let w = omega.weights()[p];
        if w == 0.0 {
            continue;
        }
        let rho = omega.density(p).unwrap();
        let (n, m) = (ldims[i], rdims[j]);
        match side {
            Side::Left => {
                weights[i] += w;
                accum[i] += partial_trace_right(rho, n, m).scale(w);
            }
            Side::Right => {
                weights[j] += w;
                accum[j] += partial_trace_left(rho, n, m).scale(w);
            }
        }
    }
    let densities = accum
        .into_iter()
        .zip(&weights)
        .map(|(mtx, &w)| if w > 0.0 { Some(mtx.unscale(w)) } else { None })
        .collect();
    State::new(kept, weights, densities)
}

/// A state is pure iff exactly one block carries weight ≥ 1 − tol and that
/// block's density has second-largest eigenvalue ≤ tol. This characterizes
/// the extreme states of a multi-matrix algebra.
pub fn is_pure(omega: &State, tol: f64) -> bool {
    let mut dominant: Option<usize> = None;
    for (b, &w) in omega.weights().iter().enumerate() {
        if w >= 1.0 - tol {
            dominant = Some(b);
            break;
        }
    }
    let Some(b) = dominant else { return false };
    let rho = match omega.density(b) {
        Some(r) => r,
        None => return false,
    };
    if rho.nrows() == 1 {
        return true;
    }
    let (vals, _) = eigh(rho);
    vals[1] <= tol
}

/// Product-state test of the factorization ω(x⊗y) = ω(x⊗1)·ω(1⊗y),
/// verified entrywise on the trace-orthonormal matrix-unit bases of the
/// factors.
pub fn is_product_state(omega: &State, t: &TensorAlgebra, tol: f64) -> Result<bool> {
    if !omega.owner().compatible(t.product()) {
        return Err(Error::DomainMismatch(
            "state does not live on the product algebra".into(),
        ));
    }
    let left_basis = t.left().basis_elements();
    let right_basis = t.right().basis_elements();
    let left_vals: Vec<Complex64> = left_basis
        .iter()
        .map(|e| omega.evaluate(&t.embed_left(e)))
        .collect::<Result<_>>()?;
    let right_vals: Vec<Complex64> = right_basis
        .iter()
        .map(|f| omega.evaluate(&t.embed_right(f)))
        .collect::<Result<_>>()?;
    for (a, e) in left_basis.iter().enumerate() {
        for (b, f) in right_basis.iter().enumerate() {
            let joint = omega.evaluate(&t.embed_pair(e, f))?;
            if (joint - left_vals[a] * right_vals[b]).norm() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Random full state: flat simplex weights, Wishart-normalized densities.
pub fn random_state(a: &MatrixAlgebra, seed: u64) -> State {
    let dims = a
        .block_dims()
        .expect("random_state requires a canonical algebra")
        .to_vec();
    let mut rng = rng_from(seed);
    let raw: Vec<f64> = dims
        .iter()
        .map(|_| {
            let e: f64 = rng.sample(rand_distr::Exp1);
            e
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|&x| x / total).collect();
    let densities = dims
        .iter()
        .map(|&n| {
            let g = gaussian_matrix(&mut rng, n, n);
            let w = &g * g.adjoint();
            let tr = w.trace().re;
            Some(w.unscale(tr))
        })
        .collect();
    State::new(a, weights, densities).expect("sampler respects state invariants")
}

/// Random pure state: block chosen proportional to its dimension, Gaussian
/// unit vector inside it.
pub fn random_pure_state(a: &MatrixAlgebra, seed: u64) -> State {
    let dims = a
        .block_dims()
        .expect("random_pure_state requires a canonical algebra")
        .to_vec();
    let mut rng = rng_from(seed);
    let total: usize = dims.iter().sum();
    let mut pick = rng.random_range(0..total);
    let mut block = 0;
    for (b, &n) in dims.iter().enumerate() {
        if pick < n {
            block = b;
            break;
        }
        pick -= n;
    }
    let mut v = gaussian_vector(&mut rng, dims[block]);
    let mut norm = v.norm();
    while norm < 1e-12 {
        v = gaussian_vector(&mut rng, dims[block]);
        norm = v.norm();
    }
    let (state, _) = vector_state(a, block, &v.unscale(norm)).unwrap();
    state
}

/// The product state ω₁ ⊗ ω₂: weights pᵢqⱼ, densities ρᵢ ⊗ σⱼ.
pub fn product_state(t: &TensorAlgebra, left: &State, right: &State) -> Result<State> {
    if !left.owner().compatible(t.left()) || !right.owner().compatible(t.right()) {
        return Err(Error::DomainMismatch(
            "factors do not match the tensor algebra".into(),
        ));
    }
    let mut weights = Vec::with_capacity(t.pairs().len());
    let mut densities = Vec::with_capacity(t.pairs().len());
    for &(i, j) in t.pairs() {
        let w = left.weights()[i] * right.weights()[j];
        weights.push(w);
        densities.push(if w > 0.0 {
            Some(kron(
                left.density(i).unwrap(),
                right.density(j).unwrap(),
            ))
        } else {
            None
        });
    }
    State::new(t.product(), weights, densities)
}

/// Deterministic random product state (independent factor draws).
pub fn random_product_state(t: &TensorAlgebra, seed: u64) -> State {
    let l = random_state(t.left(), child_seed(seed, 0));
    let r = random_state(t.right(), child_seed(seed, 1));
    product_state(t, &l, &r).expect("factor draws live on the factors")
}
