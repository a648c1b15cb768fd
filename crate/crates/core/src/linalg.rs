//! Dense complex linear algebra shared by every module: Hermitian
//! eigendecompositions, trace-inner-product Gram-Schmidt, partial traces and
//! transposes over Kronecker blocks, and seeded Gaussian sampling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Trace inner product ⟨u, v⟩ = tr(u† v).
pub fn frob_inner(u: &CMat, v: &CMat) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Largest singular value. This is the C*-norm of a single matrix block.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. The input is symmetrized first so callers may pass
/// data carrying O(eps) drift.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()).scale(0.5);
    let se = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(m.nrows(), m.ncols());
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Top eigenpair of a Hermitian matrix.
pub fn top_eigenpair(m: &CMat) -> (f64, CVec) {
    let (vals, vecs) = eigh(m);
    (vals[0], vecs.column(0).clone_owned())
}

/// Eigenvalue-wise sign of a Hermitian matrix. Eigenvalues within
/// `zero_tol` of zero map to 0, not ±1, so the result is a contraction
/// supported on the non-degenerate spectrum.
pub fn hermitian_sign(m: &CMat, zero_tol: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for (k, &v) in vals.iter().enumerate() {
        let s = if v > zero_tol {
            1.0
        } else if v < -zero_tol {
            -1.0
        } else {
            0.0
        };
        if s != 0.0 {
            let col = vecs.column(k).clone_owned();
            out += (&col * col.adjoint()).scale(s);
        }
    }
    out
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of vectors, (u ⊗ v)[a·m + b] = u[a]·v[b].
pub fn kron_vec(u: &CVec, v: &CVec) -> CVec {
    let (n, m) = (u.len(), v.len());
    CVec::from_fn(n * m, |k, _| u[k / m] * v[k % m])
}

/// Trace out the right m-dimensional factor of an (n·m)×(n·m) matrix.
pub fn partial_trace_right(rho: &CMat, n: usize, m: usize) -> CMat {
    let mut out = CMat::zeros(n, n);
    for a in 0..n {
        for c in 0..n {
            let mut s = C_ZERO;
            for b in 0..m {
                s += rho[(a * m + b, c * m + b)];
            }
            out[(a, c)] = s;
        }
    }
    out
}

/// Trace out the left n-dimensional factor of an (n·m)×(n·m) matrix.
pub fn partial_trace_left(rho: &CMat, n: usize, m: usize) -> CMat {
    let mut out = CMat::zeros(m, m);
    for b in 0..m {
        for d in 0..m {
            let mut s = C_ZERO;
            for a in 0..n {
                s += rho[(a * m + b, a * m + d)];
            }
            out[(b, d)] = s;
        }
    }
    out
}

/// Partial transpose on the right factor: ((a,b),(c,d)) ↦ ((a,d),(c,b)).
pub fn partial_transpose_right(rho: &CMat, n: usize, m: usize) -> CMat {
    let mut out = CMat::zeros(n * m, n * m);
    for a in 0..n {
        for b in 0..m {
            for c in 0..n {
                for d in 0..m {
                    out[(a * m + d, c * m + b)] = rho[(a * m + b, c * m + d)];
                }
            }
        }
    }
    out
}

/// Tr_R[ρ (1 ⊗ M)]: the n×n matrix K with tr(K·x) = tr(ρ (x ⊗ M)) for all x.
pub fn contract_right(rho: &CMat, mright: &CMat, n: usize, m: usize) -> CMat {
    let mut out = CMat::zeros(n, n);
    for a in 0..n {
        for c in 0..n {
            let mut s = C_ZERO;
            for b in 0..m {
                for f in 0..m {
                    s += rho[(a * m + b, c * m + f)] * mright[(f, b)];
                }
            }
            out[(a, c)] = s;
        }
    }
    out
}

/// Tr_L[ρ (X ⊗ 1)]: the m×m matrix K with tr(K·y) = tr(ρ (X ⊗ y)) for all y.
pub fn contract_left(rho: &CMat, xleft: &CMat, n: usize, m: usize) -> CMat {
    let mut out = CMat::zeros(m, m);
    for b in 0..m {
        for f in 0..m {
            let mut s = C_ZERO;
            for a in 0..n {
                for c in 0..n {
                    s += rho[(a * m + b, c * m + f)] * xleft[(c, a)];
                }
            }
            out[(b, f)] = s;
        }
    }
    out
}

/// Projects `m` off the orthonormal `basis` (twice, for re-orthogonalization)
/// and returns the normalized residual direction, or None when `m` lies in
/// the span within `tol` relative to its own norm.
pub fn residual_direction(basis: &[CMat], m: &CMat, tol: f64) -> Option<CMat> {
    let scale = m.norm().max(1.0);
    let mut r = m.clone();
    for _ in 0..2 {
        for q in basis {
            let c = frob_inner(q, &r);
            r -= q * c;
        }
    }
    let n = r.norm();
    if n <= tol * scale {
        None
    } else {
        Some(r.unscale(n))
    }
}

/// Modified Gram-Schmidt over the trace inner product; returns an
/// orthonormal basis of the span of `mats`.
pub fn orthonormalize(mats: &[CMat], tol: f64) -> Vec<CMat> {
    let mut basis: Vec<CMat> = Vec::new();
    for m in mats {
        if let Some(q) = residual_direction(&basis, m, tol) {
            basis.push(q);
        }
    }
    basis
}

/// Frobenius norm of `m` minus its orthogonal projection onto span(basis).
pub fn span_residual(basis: &[CMat], m: &CMat) -> f64 {
    let mut r = m.clone();
    for q in basis {
        let c = frob_inner(q, &r);
        r -= q * c;
    }
    r.norm()
}

/// Residual norms of many candidates against an orthonormal basis at once,
/// batched through two matrix products per chunk.
pub fn batch_span_residuals(basis: &[CMat], candidates: &[CMat]) -> Vec<f64> {
    if candidates.is_empty() {
        return Vec::new();
    }
    if basis.is_empty() {
        return candidates.iter().map(|c| c.norm()).collect();
    }
    let dd = basis[0].nrows() * basis[0].ncols();
    let k = basis.len();
    let mut v = CMat::zeros(dd, k);
    for (col, q) in basis.iter().enumerate() {
        v.set_column(col, &vec_col(q));
    }
    let vh = v.adjoint();

    let mut out = Vec::with_capacity(candidates.len());
    const CHUNK: usize = 256;
    for chunk in candidates.chunks(CHUNK) {
        let mut c = CMat::zeros(dd, chunk.len());
        for (col, m) in chunk.iter().enumerate() {
            c.set_column(col, &vec_col(m));
        }
        let coeffs = &vh * &c;
        let r = c - &v * coeffs;
        for col in 0..chunk.len() {
            out.push(r.column(col).norm());
        }
    }
    out
}

/// Column-major vectorization.
pub fn vec_col(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_col`] for square matrices.
pub fn unvec_col(v: &CVec, n: usize) -> CMat {
    CMat::from_column_slice(n, n, v.as_slice())
}

/// splitmix64 step; used to derive independent child seeds.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with iid standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| gaussian_complex(rng))
}

/// GUE-type random Hermitian matrix.
pub fn gaussian_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}
