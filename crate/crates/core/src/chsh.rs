//! The CHSH functional |ω(A⊗(B−B′))| + |ω(A′⊗(B+B′))| over self-adjoint
//! contractions, and its maximization by monotone alternating ascent
//! (see-saw): exact coordinate updates through the trace-dual gradients,
//! with an optional state-update step for the global search.

use crate::algebra::{
    conditional_expectation, random_self_adjoint_contraction, AlgebraElement,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::{child_seed, contract_left, contract_right, eigh, hermitian_sign, CMat, CVec};
use crate::tensor::{random_state, vector_state, State, TensorAlgebra};

/// Tolerance for the self-adjointness check on observables.
pub const SA_TOL: f64 = 1e-10;

/// Slack allowed above operator norm 1.
pub const NORM_SLACK: f64 = 1e-10;

/// A CHSH observable quadruple: A, A′ in the left factor, B, B′ in the
/// right factor, all self-adjoint contractions.
#[derive(Debug, Clone)]
pub struct ChshObservables {
    pub a: AlgebraElement,
    pub a_prime: AlgebraElement,
    pub b: AlgebraElement,
    pub b_prime: AlgebraElement,
}

impl ChshObservables {
    pub fn new(
        a: AlgebraElement,
        a_prime: AlgebraElement,
        b: AlgebraElement,
        b_prime: AlgebraElement,
    ) -> Result<Self> {
        let obs = Self {
            a,
            a_prime,
            b,
            b_prime,
        };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("A", &self.a),
            ("A'", &self.a_prime),
            ("B", &self.b),
            ("B'", &self.b_prime),
        ] {
            if !x.is_self_adjoint(SA_TOL) {
                return Err(Error::ContractViolation(format!(
                    "{name} is not self-adjoint within {SA_TOL:.0e}"
                )));
            }
            let n = x.op_norm();
            if n > 1.0 + NORM_SLACK {
                return Err(Error::ContractViolation(format!(
                    "{name} has operator norm {n} > 1"
                )));
            }
        }
        if !self.a.owner().compatible(self.a_prime.owner())
            || !self.b.owner().compatible(self.b_prime.owner())
        {
            return Err(Error::DomainMismatch(
                "observable pairs live on different factors".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a see-saw run: the best observables found, the sign choices
/// that replaced the absolute values, the achieved value and the monotone
/// per-iteration trace.
#[derive(Debug, Clone)]
pub struct ChshReport {
    pub observables: ChshObservables,
    pub signs: (i8, i8),
    pub value: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// |ω(A⊗(B−B′))| + |ω(A′⊗(B+B′))|. Both inner evaluations are real because
/// the arguments are self-adjoint; observables are validated first.
pub fn chsh_value(omega: &State, t: &TensorAlgebra, obs: &ChshObservables) -> Result<f64> {
    obs.validate()?;
    let (t1, t2) = chsh_terms(omega, t, obs)?;
    Ok(t1.abs() + t2.abs())
}

/// The two signed correlation terms (ω(A⊗(B−B′)), ω(A′⊗(B+B′))).
fn chsh_terms(omega: &State, t: &TensorAlgebra, obs: &ChshObservables) -> Result<(f64, f64)> {
    let bm = &obs.b - &obs.b_prime;
    let bp = &obs.b + &obs.b_prime;
    let v1 = omega.evaluate(&t.embed_pair(&obs.a, &bm))?;
    let v2 = omega.evaluate(&t.embed_pair(&obs.a_prime, &bp))?;
    debug_assert!(v1.im.abs() < 1e-8 && v2.im.abs() < 1e-8);
    Ok((v1.re, v2.re))
}

/// Trace-dual of x ↦ ω(x ⊗ m) as an element of the left factor.
fn left_dual(omega: &State, t: &TensorAlgebra, m: &AlgebraElement) -> AlgebraElement {
    let ldims = t.left().block_dims().unwrap();
    let rdims = t.right().block_dims().unwrap();
    let mut blocks: Vec<CMat> = ldims.iter().map(|&n| CMat::zeros(n, n)).collect();
    for (p, &(i, j)) in t.pairs().iter().enumerate() {
        let w = omega.weights()[p];
        if w == 0.0 {
            continue;
        }
        let rho = omega.density(p).unwrap();
        blocks[i] += contract_right(rho, m.block(j), ldims[i], rdims[j]).scale(w);
    }
    AlgebraElement::from_blocks(t.left(), blocks).unwrap()
}

/// Trace-dual of y ↦ ω(x ⊗ y) as an element of the right factor.
fn right_dual(omega: &State, t: &TensorAlgebra, x: &AlgebraElement) -> AlgebraElement {
    let ldims = t.left().block_dims().unwrap();
    let rdims = t.right().block_dims().unwrap();
    let mut blocks: Vec<CMat> = rdims.iter().map(|&m| CMat::zeros(m, m)).collect();
    for (p, &(i, j)) in t.pairs().iter().enumerate() {
        let w = omega.weights()[p];
        if w == 0.0 {
            continue;
        }
        let rho = omega.density(p).unwrap();
        blocks[j] += contract_left(rho, x.block(i), ldims[i], rdims[j]).scale(w);
    }
    AlgebraElement::from_blocks(t.right(), blocks).unwrap()
}

/// Best self-adjoint contraction for a linear objective tr(g·x): the
/// eigenvalue-wise sign of the gradient, projected into the algebra by the
/// conditional expectation. Near-zero gradients keep the previous iterate.
fn sign_step(gradient: &AlgebraElement, prev: &AlgebraElement) -> AlgebraElement {
    let scale = gradient.norm_frobenius();
    if scale <= 1e-14 {
        return prev.clone();
    }
    let projected = conditional_expectation(&gradient.ambient_matrix(), gradient.owner())
        .expect("gradient has ambient shape");
    let zero_tol = 1e-12 * scale.max(1.0);
    let blocks = projected
        .blocks()
        .iter()
        .map(|b| hermitian_sign(b, zero_tol))
        .collect();
    AlgebraElement::from_blocks(gradient.owner(), blocks).unwrap()
}

pub(crate) fn check_ambient_cap(t: &TensorAlgebra) -> Result<()> {
    let d = t.product().ambient_dim();
    if d > crate::AMBIENT_CAP {
        return Err(Error::InvalidPresentation(format!(
            "product ambient dimension {d} exceeds the search cap {}",
            crate::AMBIENT_CAP
        )));
    }
    Ok(())
}

fn sgn_or(prev: f64, value: f64) -> f64 {
    if value > 1e-15 {
        1.0
    } else if value < -1e-15 {
        -1.0
    } else {
        prev
    }
}

struct Iterate {
    a: AlgebraElement,
    a_prime: AlgebraElement,
    b: AlgebraElement,
    b_prime: AlgebraElement,
    s1: f64,
    s2: f64,
}

impl Iterate {
    fn random(t: &TensorAlgebra, seed: u64) -> Self {
        Iterate {
            a: random_self_adjoint_contraction(t.left(), child_seed(seed, 0)),
            a_prime: random_self_adjoint_contraction(t.left(), child_seed(seed, 1)),
            b: random_self_adjoint_contraction(t.right(), child_seed(seed, 2)),
            b_prime: random_self_adjoint_contraction(t.right(), child_seed(seed, 3)),
            s1: 1.0,
            s2: 1.0,
        }
    }

    fn observables(&self) -> Result<ChshObservables> {
        ChshObservables::new(
            self.a.clone(),
            self.a_prime.clone(),
            self.b.clone(),
            self.b_prime.clone(),
        )
    }

    fn terms(&self, omega: &State, t: &TensorAlgebra) -> Result<(f64, f64)> {
        let obs = ChshObservables {
            a: self.a.clone(),
            a_prime: self.a_prime.clone(),
            b: self.b.clone(),
            b_prime: self.b_prime.clone(),
        };
        chsh_terms(omega, t, &obs)
    }

    fn refresh_signs(&mut self, omega: &State, t: &TensorAlgebra) -> Result<(f64, f64)> {
        let (t1, t2) = self.terms(omega, t)?;
        self.s1 = sgn_or(self.s1, t1);
        self.s2 = sgn_or(self.s2, t2);
        Ok((t1, t2))
    }

    /// One full sweep of exact coordinate maximizations; returns the value
    /// |t1| + |t2| after the sweep. Never decreases the value.
    fn sweep(&mut self, omega: &State, t: &TensorAlgebra) -> Result<f64> {
        self.refresh_signs(omega, t)?;

        let bm = &self.b - &self.b_prime;
        self.a = sign_step(&left_dual(omega, t, &bm).scale(self.s1), &self.a);
        let bp = &self.b + &self.b_prime;
        self.a_prime = sign_step(&left_dual(omega, t, &bp).scale(self.s2), &self.a_prime);

        let ka = right_dual(omega, t, &self.a).scale(self.s1);
        let kap = right_dual(omega, t, &self.a_prime).scale(self.s2);
        self.b = sign_step(&(&ka + &kap), &self.b);
        self.b_prime = sign_step(&(&kap - &ka), &self.b_prime);

        let (t1, t2) = self.terms(omega, t)?;
        Ok(t1.abs() + t2.abs())
    }

    /// The self-adjoint CHSH element s₁·A⊗(B−B′) + s₂·A′⊗(B+B′).
    fn chsh_element(&self, t: &TensorAlgebra) -> AlgebraElement {
        let bm = &self.b - &self.b_prime;
        let bp = &self.b + &self.b_prime;
        let first = t.embed_pair(&self.a, &bm).scale(self.s1);
        let second = t.embed_pair(&self.a_prime, &bp).scale(self.s2);
        &first + &second
    }
}

fn single_seesaw(
    omega: &State,
    t: &TensorAlgebra,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<(Iterate, f64, usize, bool, Vec<f64>)> {
    let mut it = Iterate::random(t, seed);
    let mut history = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        let value = it.sweep(omega, t)?;
        history.push(value);
        iterations += 1;
        if value - prev < tol && prev.is_finite() {
            converged = true;
            break;
        }
        prev = value;
    }
    let value = *history.last().unwrap();
    Ok((it, value, iterations, converged, history))
}

/// Maximizes the CHSH functional over observables for a fixed state by
/// monotone alternating ascent, best over independent restarts (parallel
/// when the `parallel` feature is on; the winner is deterministic).
pub fn seesaw_observables(
    omega: &State,
    t: &TensorAlgebra,
    seed: u64,
    restarts: usize,
    max_iter: usize,
    tol: f64,
) -> Result<ChshReport> {
    check_ambient_cap(t)?;
    if !omega.owner().compatible(t.product()) {
        return Err(Error::DomainMismatch(
            "state does not live on the product algebra".into(),
        ));
    }
    let n = restarts.max(1);
    let best = exec::best_of(
        n,
        |r| single_seesaw(omega, t, child_seed(seed, r as u64), max_iter, tol),
        |res| res.as_ref().map(|(_, v, ..)| *v).unwrap_or(f64::NEG_INFINITY),
    )
    .expect("at least one restart");
    let (_, _, run) = best;
    let (it, value, iterations, converged, history) = run?;
    Ok(ChshReport {
        observables: it.observables()?,
        signs: (it.s1 as i8, it.s2 as i8),
        value,
        iterations,
        restarts_used: n,
        converged,
        history,
    })
}

/// See-saw result together with the maximizing state found by the global
/// search.
#[derive(Debug, Clone)]
pub struct GlobalChshReport {
    pub state: State,
    pub report: ChshReport,
}

/// For fixed observables and signs the maximizing state is the vector state
/// of the top eigenvector of the CHSH element; its top eigenvalue is the
/// maximum over all states.
fn maximizing_state(t: &TensorAlgebra, element: &AlgebraElement) -> (State, f64) {
    let mut best: Option<(usize, f64, CVec)> = None;
    for (p, blk) in element.blocks().iter().enumerate() {
        let (vals, vecs) = eigh(blk);
        let lam = vals[0];
        if best.as_ref().map(|(_, l, _)| lam > *l).unwrap_or(true) {
            best = Some((p, lam, vecs.column(0).clone_owned()));
        }
    }
    let (p, lam, v) = best.expect("product algebra has at least one block");
    let (state, _) = vector_state(t.product(), p, &v).expect("eigenvector is unit");
    (state, lam)
}

fn single_global(
    t: &TensorAlgebra,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<(State, Iterate, f64, usize, bool, Vec<f64>)> {
    let mut it = Iterate::random(t, child_seed(seed, 0));
    let mut state = random_state(t.product(), child_seed(seed, 1));
    let mut history = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        // Signs must match the current state before the state update so the
        // eigenvalue step can only increase the value.
        it.refresh_signs(&state, t)?;
        let (new_state, _) = maximizing_state(t, &it.chsh_element(t));
        state = new_state;
        let value = it.sweep(&state, t)?;
        history.push(value);
        iterations += 1;
        if value - prev < tol && prev.is_finite() {
            converged = true;
            break;
        }
        prev = value;
    }
    let value = *history.last().unwrap();
    Ok((state, it, value, iterations, converged, history))
}

/// Joint maximization over states and observables: alternates the
/// observable see-saw with the top-eigenvector state update.
pub fn seesaw_global(
    t: &TensorAlgebra,
    seed: u64,
    restarts: usize,
    max_iter: usize,
    tol: f64,
) -> Result<GlobalChshReport> {
    check_ambient_cap(t)?;
    let n = restarts.max(1);
    let best = exec::best_of(
        n,
        |r| single_global(t, child_seed(seed, r as u64), max_iter, tol),
        |res| {
            res.as_ref()
                .map(|(_, _, v, ..)| *v)
                .unwrap_or(f64::NEG_INFINITY)
        },
    )
    .expect("at least one restart");
    let (_, _, run) = best;
    let (state, it, value, iterations, converged, history) = run?;
    Ok(GlobalChshReport {
        state,
        report: ChshReport {
            observables: it.observables()?,
            signs: (it.s1 as i8, it.s2 as i8),
            value,
            iterations,
            restarts_used: n,
            converged,
            history,
        },
    })
}
