//! Shared oracles for the integration tests. These recompute expectations
//! from raw ambient matrices with explicit loops, independent of the
//! evaluate/embed code paths they are used to check.
#![allow(dead_code)] // each test binary uses a different subset

use num_complex::Complex64;
use opalg_core::algebra::AlgebraElement;
use opalg_core::chsh::ChshObservables;
use opalg_core::linalg::{CMat, CVec, C_ZERO};
use opalg_core::tensor::{vector_state, State, TensorAlgebra};

/// tr(a·b) with explicit index loops.
pub fn raw_trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = C_ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Kronecker product with explicit loops.
pub fn raw_kron(a: &CMat, b: &CMat) -> CMat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = CMat::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[(i * m + k, j * m + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Embeds x ⊗ y over all product blocks as one ambient matrix.
pub fn raw_embed_pair(t: &TensorAlgebra, x: &AlgebraElement, y: &AlgebraElement) -> CMat {
    let d = t.product().ambient_dim();
    let mut out = CMat::zeros(d, d);
    let mut off = 0;
    for &(i, j) in t.pairs() {
        let blk = raw_kron(x.block(i), y.block(j));
        let n = blk.nrows();
        out.view_mut((off, off), (n, n)).copy_from(&blk);
        off += n;
    }
    out
}

/// Brute-force CHSH value: |tr(ρ·A⊗(B−B'))| + |tr(ρ·A'⊗(B+B'))| from the
/// ambient block-diagonal density, with raw traces.
pub fn chsh_oracle(omega: &State, t: &TensorAlgebra, obs: &ChshObservables) -> f64 {
    let rho = omega.full_density();
    let bm = &obs.b - &obs.b_prime;
    let bp = &obs.b + &obs.b_prime;
    let first = raw_trace_product(&rho, &raw_embed_pair(t, &obs.a, &bm));
    let second = raw_trace_product(&rho, &raw_embed_pair(t, &obs.a_prime, &bp));
    first.re.abs() + second.re.abs()
}

/// The singlet vector state on the first product block of [2] ⊗ [2].
pub fn bell_phi_plus(t: &TensorAlgebra) -> State {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = CVec::from_vec(vec![
        Complex64::new(s, 0.0),
        C_ZERO,
        C_ZERO,
        Complex64::new(s, 0.0),
    ]);
    vector_state(t.product(), 0, &v).unwrap().0
}
