//! Finite-dimensional C*-algebras presented as multi-matrix algebras.
//!
//! Two presentation forms coexist. The canonical form is a direct sum
//! ⊕ᵢ M_{nᵢ} whose elements are block-diagonal matrices; the subalgebra form
//! is a trace-orthonormal basis spanning a unital *-closed subspace of an
//! ambient matrix space. Structural operations (operator norm, commutant,
//! generated algebra, Wedderburn decomposition, conditional expectation)
//! work on both and every other module builds on them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, child_seed, eigh, frob_inner, gaussian_matrix, orthonormalize,
    residual_direction, rng_from, span_residual, spectral_norm, CMat, CVec, C_ONE, C_ZERO,
};

/// Default relative tolerance for closure, membership and rank decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Bounded retries for randomized spectral splits in [`wedderburn_decompose`].
const WEDDERBURN_RETRIES: usize = 5;

/// Presentation of a finite-dimensional C*-algebra.
#[derive(Debug, Clone)]
pub enum Form {
    /// Elements are exactly the block-diagonal matrices with these sizes.
    Canonical { block_dims: Vec<usize> },
    /// A trace-orthonormal basis spanning a unital *-closed subspace of the
    /// d×d matrices.
    Subalgebra { ambient_dim: usize, basis: Vec<CMat> },
}

#[derive(Debug)]
struct AlgebraInner {
    label: String,
    form: Form,
}

/// A finite-dimensional C*-algebra. Cheap to clone; immutable after
/// construction.
#[derive(Clone)]
pub struct MatrixAlgebra {
    inner: Arc<AlgebraInner>,
}

impl fmt::Debug for MatrixAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form() {
            Form::Canonical { block_dims } => {
                write!(f, "MatrixAlgebra({:?}, blocks {:?})", self.label(), block_dims)
            }
            Form::Subalgebra { ambient_dim, basis } => write!(
                f,
                "MatrixAlgebra({:?}, dim {} in M{})",
                self.label(),
                basis.len(),
                ambient_dim
            ),
        }
    }
}

impl MatrixAlgebra {
    /// Canonical multi-matrix algebra ⊕ᵢ M_{nᵢ}.
    pub fn canonical(label: impl Into<String>, block_dims: &[usize]) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidPresentation(
                "block dimension list is empty".into(),
            ));
        }
        if let Some(&d) = block_dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidPresentation(format!(
                "block dimension {d} must be positive"
            )));
        }
        Ok(Self {
            inner: Arc::new(AlgebraInner {
                label: label.into(),
                form: Form::Canonical {
                    block_dims: block_dims.to_vec(),
                },
            }),
        })
    }

    /// Subalgebra form from a basis that is already trace-orthonormal and
    /// *-closed; internal constructor for operations that guarantee closure.
    pub(crate) fn subalgebra_unchecked(
        label: impl Into<String>,
        ambient_dim: usize,
        basis: Vec<CMat>,
    ) -> Self {
        Self {
            inner: Arc::new(AlgebraInner {
                label: label.into(),
                form: Form::Subalgebra { ambient_dim, basis },
            }),
        }
    }

    /// Same algebra under a new label.
    pub fn relabel(&self, label: impl Into<String>) -> Self {
        Self {
            inner: Arc::new(AlgebraInner {
                label: label.into(),
                form: self.form().clone(),
            }),
        }
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn form(&self) -> &Form {
        &self.inner.form
    }

    pub fn is_canonical(&self) -> bool {
        matches!(self.form(), Form::Canonical { .. })
    }

    /// Block sizes of the canonical form.
    pub fn block_dims(&self) -> Option<&[usize]> {
        match self.form() {
            Form::Canonical { block_dims } => Some(block_dims),
            Form::Subalgebra { .. } => None,
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims().map(|d| d.len()).unwrap_or(1)
    }

    /// Dimension of the matrix space the elements live in: Σ nᵢ for the
    /// canonical form, the ambient size for the subalgebra form.
    pub fn ambient_dim(&self) -> usize {
        match self.form() {
            Form::Canonical { block_dims } => block_dims.iter().sum(),
            Form::Subalgebra { ambient_dim, .. } => *ambient_dim,
        }
    }

    /// Linear dimension: Σ nᵢ² (canonical) or the basis length (subalgebra).
    pub fn linear_dim(&self) -> usize {
        match self.form() {
            Form::Canonical { block_dims } => block_dims.iter().map(|n| n * n).sum(),
            Form::Subalgebra { basis, .. } => basis.len(),
        }
    }

    /// Two handles are compatible when elements can be exchanged between
    /// them: same canonical block structure, or the same underlying object.
    pub fn compatible(&self, other: &MatrixAlgebra) -> bool {
        if Arc::ptr_eq(&self.inner, &other.inner) {
            return true;
        }
        match (self.form(), other.form()) {
            (Form::Canonical { block_dims: a }, Form::Canonical { block_dims: b }) => a == b,
            (
                Form::Subalgebra {
                    ambient_dim: da,
                    basis: ba,
                },
                Form::Subalgebra {
                    ambient_dim: db,
                    basis: bb,
                },
            ) => da == db && ba.len() == bb.len(),
            _ => false,
        }
    }

    pub fn identity_element(&self) -> AlgebraElement {
        match self.form() {
            Form::Canonical { block_dims } => AlgebraElement {
                owner: self.clone(),
                data: ElementData::Blocks(
                    block_dims.iter().map(|&n| CMat::identity(n, n)).collect(),
                ),
            },
            Form::Subalgebra { ambient_dim, .. } => AlgebraElement {
                owner: self.clone(),
                data: ElementData::Ambient(CMat::identity(*ambient_dim, *ambient_dim)),
            },
        }
    }

    pub fn zero_element(&self) -> AlgebraElement {
        match self.form() {
            Form::Canonical { block_dims } => AlgebraElement {
                owner: self.clone(),
                data: ElementData::Blocks(block_dims.iter().map(|&n| CMat::zeros(n, n)).collect()),
            },
            Form::Subalgebra { ambient_dim, .. } => AlgebraElement {
                owner: self.clone(),
                data: ElementData::Ambient(CMat::zeros(*ambient_dim, *ambient_dim)),
            },
        }
    }

    /// Trace-orthonormal linear basis as elements: the matrix units
    /// E^{(i)}_{ab} for the canonical form, the stored basis otherwise.
    pub fn basis_elements(&self) -> Vec<AlgebraElement> {
        match self.form() {
            Form::Canonical { block_dims } => {
                let mut out = Vec::with_capacity(self.linear_dim());
                for (blk, &n) in block_dims.iter().enumerate() {
                    for a in 0..n {
                        for b in 0..n {
                            out.push(self.canonical_unit(blk, a, b));
                        }
                    }
                }
                out
            }
            Form::Subalgebra { basis, .. } => basis
                .iter()
                .map(|m| AlgebraElement {
                    owner: self.clone(),
                    data: ElementData::Ambient(m.clone()),
                })
                .collect(),
        }
    }

    /// The same basis as ambient matrices (canonical blocks embedded
    /// block-diagonally).
    pub fn ambient_basis(&self) -> Vec<CMat> {
        self.basis_elements()
            .iter()
            .map(|e| e.ambient_matrix())
            .collect()
    }

    /// The matrix unit E^{(blk)}_{ab} as an element (canonical form only).
    pub fn canonical_unit(&self, blk: usize, a: usize, b: usize) -> AlgebraElement {
        let dims = self
            .block_dims()
            .expect("canonical_unit requires the canonical form");
        let mut blocks: Vec<CMat> = dims.iter().map(|&n| CMat::zeros(n, n)).collect();
        blocks[blk][(a, b)] = C_ONE;
        AlgebraElement {
            owner: self.clone(),
            data: ElementData::Blocks(blocks),
        }
    }

    /// Coefficients of `x` in [`basis_elements`] order.
    pub fn basis_coefficients(&self, x: &AlgebraElement) -> CVec {
        assert!(
            self.compatible(x.owner()),
            "coefficients requested for a foreign element"
        );
        match (&x.data, self.form()) {
            (ElementData::Blocks(blocks), Form::Canonical { .. }) => {
                let mut out = Vec::with_capacity(self.linear_dim());
                for blk in blocks {
                    for a in 0..blk.nrows() {
                        for b in 0..blk.ncols() {
                            out.push(blk[(a, b)]);
                        }
                    }
                }
                CVec::from_vec(out)
            }
            (ElementData::Ambient(m), Form::Subalgebra { basis, .. }) => {
                CVec::from_iterator(basis.len(), basis.iter().map(|q| frob_inner(q, m)))
            }
            _ => unreachable!("element data always matches its owner's form"),
        }
    }

    /// Block offsets within the ambient space (canonical form).
    pub(crate) fn block_offsets(&self) -> Vec<usize> {
        let dims = self.block_dims().expect("block offsets need canonical form");
        let mut off = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &n in dims {
            off.push(acc);
            acc += n;
        }
        off
    }
}

#[derive(Debug, Clone)]
enum ElementData {
    Blocks(Vec<CMat>),
    Ambient(CMat),
}

/// An element of a [`MatrixAlgebra`]: block matrices in the canonical form,
/// one ambient matrix in the subalgebra form.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    owner: MatrixAlgebra,
    data: ElementData,
}

impl AlgebraElement {
    /// Element of a canonical algebra from its blocks.
    pub fn from_blocks(owner: &MatrixAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        let dims = owner.block_dims().ok_or_else(|| {
            Error::DomainMismatch("from_blocks requires a canonical algebra".into())
        })?;
        if blocks.len() != dims.len() {
            return Err(Error::DomainMismatch(format!(
                "expected {} blocks, got {}",
                dims.len(),
                blocks.len()
            )));
        }
        for (i, (b, &n)) in blocks.iter().zip(dims).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::DomainMismatch(format!(
                    "block {i} must be {n}×{n}, got {}×{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self {
            owner: owner.clone(),
            data: ElementData::Blocks(blocks),
        })
    }

    /// Element from an ambient matrix, verified to lie in the algebra within
    /// `tol` (relative to the matrix norm).
    pub fn from_ambient(owner: &MatrixAlgebra, m: &CMat, tol: f64) -> Result<Self> {
        let d = owner.ambient_dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DomainMismatch(format!(
                "ambient matrix must be {d}×{d}, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.norm().max(1.0);
        match owner.form() {
            Form::Canonical { block_dims } => {
                let offsets = owner.block_offsets();
                let mut blocks = Vec::with_capacity(block_dims.len());
                let mut captured = 0.0;
                for (&off, &n) in offsets.iter().zip(block_dims) {
                    let b = m.view((off, off), (n, n)).clone_owned();
                    captured += b.norm_squared();
                    blocks.push(b);
                }
                let off_mass = (m.norm_squared() - captured).max(0.0).sqrt();
                if off_mass > tol * scale {
                    return Err(Error::DomainMismatch(format!(
                        "matrix has off-block mass {off_mass:.3e} beyond tolerance"
                    )));
                }
                Ok(Self {
                    owner: owner.clone(),
                    data: ElementData::Blocks(blocks),
                })
            }
            Form::Subalgebra { basis, .. } => {
                let resid = span_residual(basis, m);
                if resid > tol * scale {
                    return Err(Error::DomainMismatch(format!(
                        "matrix lies {resid:.3e} outside the algebra span"
                    )));
                }
                Ok(Self {
                    owner: owner.clone(),
                    data: ElementData::Ambient(m.clone()),
                })
            }
        }
    }

    pub fn owner(&self) -> &MatrixAlgebra {
        &self.owner
    }

    /// The block matrices (canonical owners only).
    pub fn blocks(&self) -> &[CMat] {
        match &self.data {
            ElementData::Blocks(b) => b,
            ElementData::Ambient(_) => panic!("blocks() called on a subalgebra-form element"),
        }
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks()[i]
    }

    /// The element as one ambient matrix (canonical blocks are embedded
    /// block-diagonally).
    pub fn ambient_matrix(&self) -> CMat {
        match &self.data {
            ElementData::Ambient(m) => m.clone(),
            ElementData::Blocks(blocks) => {
                let d = self.owner.ambient_dim();
                let mut out = CMat::zeros(d, d);
                let mut off = 0;
                for b in blocks {
                    let n = b.nrows();
                    out.view_mut((off, off), (n, n)).copy_from(b);
                    off += n;
                }
                out
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        let data = match &self.data {
            ElementData::Blocks(b) => ElementData::Blocks(b.iter().map(|m| m.adjoint()).collect()),
            ElementData::Ambient(m) => ElementData::Ambient(m.adjoint()),
        };
        Self {
            owner: self.owner.clone(),
            data,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_complex(Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        let data = match &self.data {
            ElementData::Blocks(b) => ElementData::Blocks(b.iter().map(|m| m * s).collect()),
            ElementData::Ambient(m) => ElementData::Ambient(m * s),
        };
        Self {
            owner: self.owner.clone(),
            data,
        }
    }

    /// tr(x) over the ambient space.
    pub fn trace(&self) -> Complex64 {
        match &self.data {
            ElementData::Blocks(b) => b.iter().map(|m| m.trace()).sum(),
            ElementData::Ambient(m) => m.trace(),
        }
    }

    pub fn norm_frobenius(&self) -> f64 {
        match &self.data {
            ElementData::Blocks(b) => b.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt(),
            ElementData::Ambient(m) => m.norm(),
        }
    }

    /// C*-norm: the largest singular value across blocks.
    pub fn op_norm(&self) -> f64 {
        match &self.data {
            ElementData::Blocks(b) => b.iter().map(spectral_norm).fold(0.0, f64::max),
            ElementData::Ambient(m) => spectral_norm(m),
        }
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        (self - &self.adjoint()).op_norm() <= tol
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        assert!(
            self.owner.compatible(&other.owner),
            "element arithmetic across different algebras"
        );
        let data = match (&self.data, &other.data) {
            (ElementData::Blocks(a), ElementData::Blocks(b)) => {
                ElementData::Blocks(a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
            }
            (ElementData::Ambient(a), ElementData::Ambient(b)) => ElementData::Ambient(f(a, b)),
            _ => panic!("element arithmetic across different presentation forms"),
        };
        Self {
            owner: self.owner.clone(),
            data,
        }
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: Self) -> AlgebraElement {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: Self) -> AlgebraElement {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: Self) -> AlgebraElement {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale(-1.0)
    }
}

/// Canonical multi-matrix algebra with the given block sizes.
pub fn make_algebra(block_dims: &[usize]) -> Result<MatrixAlgebra> {
    let label = block_dims
        .iter()
        .map(|n| format!("M{n}"))
        .collect::<Vec<_>>()
        .join("⊕");
    MatrixAlgebra::canonical(label, block_dims)
}

/// C*-norm of an element: max over blocks of the largest singular value.
pub fn op_norm(x: &AlgebraElement) -> f64 {
    x.op_norm()
}

/// Whether all pairs of basis elements commute within `tol` (operator norm
/// of the commutator). Exact block structure decides the canonical form.
pub fn is_commutative(a: &MatrixAlgebra, tol: f64) -> bool {
    match a.form() {
        Form::Canonical { block_dims } => block_dims.iter().all(|&n| n == 1),
        Form::Subalgebra { basis, .. } => {
            for (i, p) in basis.iter().enumerate() {
                for q in basis.iter().skip(i + 1) {
                    if spectral_norm(&(p * q - q * p)) > tol {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// Smallest unital *-algebra containing the generators, as a subalgebra-form
/// presentation. Alternates adjoining products and adjoints against a
/// trace-orthonormalized span until one full pass leaves the dimension
/// stable. At finite dimension this equals the double commutant.
pub fn generated_star_algebra(
    ambient_dim: usize,
    generators: &[CMat],
    tol: f64,
) -> Result<MatrixAlgebra> {
    if ambient_dim == 0 {
        return Err(Error::InvalidPresentation("ambient dimension is zero".into()));
    }
    for (i, g) in generators.iter().enumerate() {
        if g.nrows() != ambient_dim || g.ncols() != ambient_dim {
            return Err(Error::InvalidPresentation(format!(
                "generator {i} is {}×{}, ambient is {ambient_dim}",
                g.nrows(),
                g.ncols()
            )));
        }
    }

    let mut seed: Vec<CMat> = vec![CMat::identity(ambient_dim, ambient_dim)];
    for g in generators {
        seed.push(g.clone());
        seed.push(g.adjoint());
    }
    let mut basis = orthonormalize(&seed, tol);

    let max_dim = ambient_dim * ambient_dim;
    loop {
        let before = basis.len();
        // Adjoints first: keeps the span *-closed before products are formed.
        let adjoints: Vec<CMat> = basis.iter().map(|m| m.adjoint()).collect();
        for m in &adjoints {
            if let Some(q) = residual_direction(&basis, m, tol) {
                basis.push(q);
            }
        }
        let snapshot = basis.clone();
        let products: Vec<CMat> = crate::exec::map_indices(snapshot.len(), |i| {
            snapshot
                .iter()
                .map(|q| &snapshot[i] * q)
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
        // Screen against the snapshot in one batched pass; only survivors
        // (rare: a closed span has none) go through the incremental MGS.
        let resids = linalg::batch_span_residuals(&snapshot, &products);
        for (prod, resid) in products.iter().zip(resids) {
            if resid > tol * prod.norm().max(1.0) {
                if let Some(r) = residual_direction(&basis, prod, tol) {
                    basis.push(r);
                }
            }
        }
        if basis.len() == before || basis.len() >= max_dim {
            break;
        }
    }

    let label = format!("alg({} gens in M{ambient_dim})", generators.len());
    Ok(MatrixAlgebra::subalgebra_unchecked(label, ambient_dim, basis))
}

/// The commutant {X : XM = MX for all M in A} inside the ambient matrix
/// space, computed as the joint null space of the commutator maps
/// X ↦ XM − MX via one Hermitian eigensolve of their Gram operator.
pub fn commutant(a: &MatrixAlgebra, tol: f64) -> Result<MatrixAlgebra> {
    let d = a.ambient_dim();
    let dd = d * d;
    let idm = CMat::identity(d, d);
    let mut gram = CMat::zeros(dd, dd);
    for m in a.ambient_basis() {
        // vec(XM − MX) = (Mᵀ ⊗ I − I ⊗ M) vec(X) in column-major vec.
        let l = linalg::kron(&m.transpose(), &idm) - linalg::kron(&idm, &m);
        gram += l.adjoint() * l;
    }
    let (vals, vecs) = eigh(&gram);
    let lam_max = vals.first().copied().unwrap_or(0.0).max(0.0);
    let cut = if lam_max <= f64::EPSILON * dd as f64 {
        f64::INFINITY // every direction commutes (the algebra is scalar)
    } else {
        tol * lam_max
    };
    let mut basis = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v <= cut {
            basis.push(linalg::unvec_col(&vecs.column(k).clone_owned(), d));
        }
    }
    // Eigenvectors of the Gram operator are orthonormal already; re-run MGS
    // to fix tiny drift and a stable ordering.
    let basis = orthonormalize(&basis, tol);
    Ok(MatrixAlgebra::subalgebra_unchecked(
        format!("{}'", a.label()),
        d,
        basis,
    ))
}

/// Artin–Wedderburn data for a multi-matrix algebra: minimal central
/// projections, full-matrix block sizes with multiplicities, and a unitary
/// `U` such that U† x U = ⊕ᵢ (aᵢ ⊗ 1_{mᵢ}) for every element x.
#[derive(Debug, Clone)]
pub struct WedderburnData {
    pub central_projections: Vec<AlgebraElement>,
    pub block_dims: Vec<usize>,
    pub multiplicities: Vec<usize>,
    pub change_of_basis: CMat,
}

impl WedderburnData {
    /// The canonical algebra ⊕ᵢ M_{nᵢ} this data exhibits.
    pub fn canonical_algebra(&self, label: impl Into<String>) -> Result<MatrixAlgebra> {
        MatrixAlgebra::canonical(label, &self.block_dims)
    }

    /// Offsets of the summands in the rotated ambient space.
    fn summand_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.block_dims.len());
        let mut acc = 0;
        for (&n, &m) in self.block_dims.iter().zip(&self.multiplicities) {
            off.push(acc);
            acc += n * m;
        }
        off
    }

    /// Extracts the canonical blocks of an ambient element, averaging over
    /// the multiplicity copies.
    pub fn to_canonical_blocks(&self, x: &CMat) -> Vec<CMat> {
        let rot = self.change_of_basis.adjoint() * x * &self.change_of_basis;
        let offsets = self.summand_offsets();
        let mut out = Vec::with_capacity(self.block_dims.len());
        for ((&n, &m), &off) in self.block_dims.iter().zip(&self.multiplicities).zip(&offsets) {
            let mut blk = CMat::zeros(n, n);
            for j in 0..n {
                for k in 0..n {
                    let mut s = C_ZERO;
                    for t in 0..m {
                        s += rot[(off + j * m + t, off + k * m + t)];
                    }
                    blk[(j, k)] = s / Complex64::new(m as f64, 0.0);
                }
            }
            out.push(blk);
        }
        out
    }

    /// Embeds canonical blocks back into the original ambient space.
    pub fn from_canonical_blocks(&self, blocks: &[CMat]) -> CMat {
        let d = self.change_of_basis.nrows();
        let offsets = self.summand_offsets();
        let mut rot = CMat::zeros(d, d);
        for ((blk, &m), &off) in blocks.iter().zip(&self.multiplicities).zip(&offsets) {
            let n = blk.nrows();
            for j in 0..n {
                for k in 0..n {
                    for t in 0..m {
                        rot[(off + j * m + t, off + k * m + t)] = blk[(j, k)];
                    }
                }
            }
        }
        &self.change_of_basis * rot * self.change_of_basis.adjoint()
    }

    /// Residual of `x` against the exhibited block structure (relative).
    pub fn structure_residual(&self, x: &CMat) -> f64 {
        let rebuilt = self.from_canonical_blocks(&self.to_canonical_blocks(x));
        (x - rebuilt).norm() / x.norm().max(1.0)
    }
}

/// Wedderburn decomposition of a closed *-algebra presentation. Canonical
/// input yields the exact permutation data; subalgebra input goes through
/// the center and a randomly split spectrum (`seed` drives the retries).
pub fn wedderburn_decompose(
    a: &MatrixAlgebra,
    tol: f64,
    seed: u64,
) -> Result<WedderburnData> {
    match a.form() {
        Form::Canonical { block_dims } => Ok(wedderburn_canonical(a, block_dims)),
        Form::Subalgebra { ambient_dim, basis } => {
            verify_closed(basis, *ambient_dim, tol)?;
            let mut last_err = None;
            for attempt in 0..WEDDERBURN_RETRIES {
                match wedderburn_generic(a, basis, *ambient_dim, tol, child_seed(seed, attempt as u64))
                {
                    Ok(data) => return Ok(data),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(last_err.unwrap_or_else(|| {
                Error::Numerical("wedderburn decomposition retries exhausted".into())
            }))
        }
    }
}

fn wedderburn_canonical(a: &MatrixAlgebra, block_dims: &[usize]) -> WedderburnData {
    let d: usize = block_dims.iter().sum();
    let offsets = a.block_offsets();
    // Descending dimension, ties by first occurrence.
    let mut order: Vec<usize> = (0..block_dims.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(block_dims[i]), i));

    let mut u = CMat::zeros(d, d);
    let mut col = 0;
    for &i in &order {
        for r in 0..block_dims[i] {
            u[(offsets[i] + r, col)] = C_ONE;
            col += 1;
        }
    }
    let mut projections = Vec::with_capacity(order.len());
    for &i in &order {
        let mut blocks: Vec<CMat> = block_dims.iter().map(|&n| CMat::zeros(n, n)).collect();
        blocks[i] = CMat::identity(block_dims[i], block_dims[i]);
        projections.push(AlgebraElement {
            owner: a.clone(),
            data: ElementData::Blocks(blocks),
        });
    }
    WedderburnData {
        central_projections: projections,
        block_dims: order.iter().map(|&i| block_dims[i]).collect(),
        multiplicities: vec![1; order.len()],
        change_of_basis: u,
    }
}

fn verify_closed(basis: &[CMat], _ambient: usize, tol: f64) -> Result<()> {
    let adjoints: Vec<CMat> = basis.iter().map(|p| p.adjoint()).collect();
    for (p, resid) in basis
        .iter()
        .zip(linalg::batch_span_residuals(basis, &adjoints))
    {
        if resid > tol * p.norm().max(1.0) {
            return Err(Error::InvalidPresentation(
                "basis is not closed under adjoints".into(),
            ));
        }
    }
    let mut products = Vec::with_capacity(basis.len() * basis.len());
    for p in basis {
        for q in basis {
            products.push(p * q);
        }
    }
    for (prod, resid) in products
        .iter()
        .zip(linalg::batch_span_residuals(basis, &products))
    {
        if resid > tol * prod.norm().max(1.0) {
            return Err(Error::InvalidPresentation(
                "basis is not closed under products".into(),
            ));
        }
    }
    let d = basis.first().map(|m| m.nrows()).unwrap_or(0);
    if d == 0 || span_residual(basis, &CMat::identity(d, d)) > tol * (d as f64).sqrt() {
        return Err(Error::InvalidPresentation(
            "basis does not contain the ambient identity".into(),
        ));
    }
    Ok(())
}

/// Clusters a descending-sorted spectrum into `want` groups by cutting at
/// the largest gaps; None when the split is not clean.
fn cluster_spectrum(vals: &[f64], want: usize) -> Option<Vec<Vec<usize>>> {
    let n = vals.len();
    if want == 0 || want > n {
        return None;
    }
    if want == n {
        return Some((0..n).map(|i| vec![i]).collect());
    }
    let mut gaps: Vec<(f64, usize)> = (0..n - 1).map(|i| (vals[i] - vals[i + 1], i)).collect();
    gaps.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let chosen = &gaps[..want - 1];
    let smallest_chosen = chosen.last().map(|g| g.0).unwrap_or(f64::INFINITY);
    let largest_rejected = gaps.get(want - 1).map(|g| g.0).unwrap_or(0.0);
    let scale = vals
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    // Demand a clean separation between structural and numerical gaps.
    if smallest_chosen < 1e3 * largest_rejected.max(1e-13 * scale) {
        return None;
    }
    let mut cuts: Vec<usize> = chosen.iter().map(|g| g.1).collect();
    cuts.sort_unstable();
    let mut clusters = Vec::with_capacity(want);
    let mut start = 0;
    for &c in &cuts {
        clusters.push((start..=c).collect());
        start = c + 1;
    }
    clusters.push((start..n).collect());
    Some(clusters)
}

fn wedderburn_generic(
    a: &MatrixAlgebra,
    basis: &[CMat],
    d: usize,
    tol: f64,
    seed: u64,
) -> Result<WedderburnData> {
    let mut rng = rng_from(seed);
    let k = basis.len();

    // Center coefficients: null space of the stacked commutator expansions.
    let mut gram = CMat::zeros(k, k);
    for bi in basis {
        let mut kappa = CMat::zeros(k, k);
        for (j, bj) in basis.iter().enumerate() {
            let comm = bj * bi - bi * bj;
            for l in 0..k {
                kappa[(l, j)] = frob_inner(&basis[l], &comm);
            }
        }
        gram += kappa.adjoint() * kappa;
    }
    let (cvals, cvecs) = eigh(&gram);
    let lam_max = cvals.first().copied().unwrap_or(0.0).max(0.0);
    let cut = if lam_max <= f64::EPSILON * k as f64 {
        f64::INFINITY
    } else {
        tol * lam_max
    };
    let mut center: Vec<CMat> = Vec::new();
    for (idx, &v) in cvals.iter().enumerate() {
        if v <= cut {
            let mut z = CMat::zeros(d, d);
            for (l, b) in basis.iter().enumerate() {
                z += b * cvecs[(l, idx)];
            }
            center.push(z);
        }
    }
    let c = center.len();
    if c == 0 {
        return Err(Error::Numerical("empty center".into()));
    }

    // Generic self-adjoint central element; its spectrum splits the
    // ambient space into the minimal central summands.
    let mut h = CMat::zeros(d, d);
    for z in &center {
        let g: f64 = rand::Rng::sample(&mut rng, rand_distr::StandardNormal);
        h += z * Complex64::new(g, 0.0);
    }
    let h = (&h + h.adjoint()).scale(0.5);
    let (hvals, hvecs) = eigh(&h);
    let clusters = cluster_spectrum(&hvals, c)
        .ok_or_else(|| Error::Numerical("degenerate central spectrum, retrying".into()))?;

    struct Summand {
        n: usize,
        m: usize,
        columns: CMat, // d × (n·m), orthonormal, adapted so elements act as a ⊗ 1_m
        projection: CMat,
    }
    let mut summands: Vec<Summand> = Vec::new();

    for cluster in &clusters {
        let r = cluster.len();
        let mut q = CMat::zeros(d, r);
        for (col, &idx) in cluster.iter().enumerate() {
            q.set_column(col, &hvecs.column(idx));
        }
        let projection = &q * q.adjoint();

        // Compressed algebra on this summand: a single full-matrix factor
        // with multiplicity.
        let compressed: Vec<CMat> = basis.iter().map(|b| q.adjoint() * b * &q).collect();
        let factor_basis = orthonormalize(&compressed, tol);
        let ksq = factor_basis.len();
        let n = (ksq as f64).sqrt().round() as usize;
        if n * n != ksq || r % n != 0 {
            return Err(Error::Numerical(format!(
                "summand dims do not factor: span {ksq}, rank {r}"
            )));
        }
        let m = r / n;

        let local = if n == 1 {
            CMat::identity(r, r)
        } else {
            adapted_frame(&compressed, r, n, m, tol, &mut rng)?
        };
        summands.push(Summand {
            n,
            m,
            columns: &q * local,
            projection,
        });
    }

    // Descending block dimension, ties by cluster order.
    let mut order: Vec<usize> = (0..summands.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(summands[i].n), i));

    let mut u = CMat::zeros(d, d);
    let mut col = 0;
    for &i in &order {
        let s = &summands[i];
        let w = s.columns.ncols();
        u.view_mut((0, col), (d, w)).copy_from(&s.columns);
        col += w;
    }

    let data = WedderburnData {
        central_projections: order
            .iter()
            .map(|&i| AlgebraElement {
                owner: a.clone(),
                data: ElementData::Ambient(summands[i].projection.clone()),
            })
            .collect(),
        block_dims: order.iter().map(|&i| summands[i].n).collect(),
        multiplicities: order.iter().map(|&i| summands[i].m).collect(),
        change_of_basis: u,
    };

    // The exhibited structure must reproduce every basis element.
    let ver_tol = (tol * 1e2).max(1e-10);
    for b in basis {
        if data.structure_residual(b) > ver_tol {
            return Err(Error::Numerical(
                "exhibited block structure does not reproduce the basis".into(),
            ));
        }
    }
    Ok(data)
}

/// Builds an orthonormal frame of a factor summand (compressed algebra ≅
/// M_n ⊗ 1_m on C^r) in which every compressed element acts as a ⊗ 1_m.
/// Route: minimal projections from a generic spectral split, partial
/// isometries between them from the polar part of a generic element.
fn adapted_frame(
    compressed: &[CMat],
    r: usize,
    n: usize,
    m: usize,
    tol: f64,
    rng: &mut impl rand::Rng,
) -> Result<CMat> {
    // Generic self-adjoint element of the factor.
    let mut g = CMat::zeros(r, r);
    for b in compressed {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        g += (b + b.adjoint()).scale(0.5) * Complex64::new(re, 0.0);
    }
    let (gvals, gvecs) = eigh(&g);
    let clusters = cluster_spectrum(&gvals, n)
        .ok_or_else(|| Error::Numerical("degenerate factor spectrum".into()))?;
    if clusters.iter().any(|cl| cl.len() != m) {
        return Err(Error::Numerical(
            "factor spectral multiplicities do not match".into(),
        ));
    }

    let frame_of = |cluster: &[usize]| -> CMat {
        let mut q = CMat::zeros(r, m);
        for (col, &idx) in cluster.iter().enumerate() {
            q.set_column(col, &gvecs.column(idx));
        }
        q
    };
    let v1 = frame_of(&clusters[0]);
    let p1 = &v1 * v1.adjoint();

    // Generic element connecting the minimal projections.
    let mut x = CMat::zeros(r, r);
    for b in compressed {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        x += b * Complex64::new(re, im);
    }

    let mut columns = CMat::zeros(r, n * m);
    for (j, cluster) in clusters.iter().enumerate() {
        let block = if j == 0 {
            v1.clone()
        } else {
            let vj = frame_of(cluster);
            let pj = &vj * vj.adjoint();
            // Polar part of p_j x p_1 is a partial isometry range(p1) → range(pj).
            let u = pj * &x * &p1;
            let svd = u.svd(true, true);
            let w_u = svd.u.as_ref().unwrap();
            let w_v = svd.v_t.as_ref().unwrap();
            let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
            let mut rank = 0;
            let mut w = CMat::zeros(r, r);
            for (idx, &s) in svd.singular_values.iter().enumerate() {
                if s > smax * tol.max(1e-12) {
                    rank += 1;
                    let uc = w_u.column(idx).clone_owned();
                    let vc = w_v.row(idx).clone_owned();
                    w += uc * vc;
                }
            }
            if rank != m {
                return Err(Error::Numerical(format!(
                    "partial isometry rank {rank}, expected {m}"
                )));
            }
            w * &v1
        };
        columns.view_mut((0, j * m), (r, m)).copy_from(&block);
    }

    // Polish orthonormality of the assembled frame.
    let cols: Vec<CMat> = (0..n * m).map(|c| columns.column(c).clone_owned().reshape_generic(nalgebra::Dyn(r), nalgebra::Dyn(1))).collect();
    let ortho = orthonormalize(&cols, 1e-12);
    if ortho.len() != n * m {
        return Err(Error::Numerical("adapted frame lost rank".into()));
    }
    let mut out = CMat::zeros(r, n * m);
    for (c, v) in ortho.iter().enumerate() {
        out.set_column(c, &v.column(0));
    }
    Ok(out)
}

/// Orthogonal projection of an ambient matrix onto span(A) in the trace
/// inner product. Identity on elements of A; preserves self-adjointness.
pub fn conditional_expectation(x: &CMat, a: &MatrixAlgebra) -> Result<AlgebraElement> {
    let d = a.ambient_dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::DomainMismatch(format!(
            "expected a {d}×{d} ambient matrix, got {}×{}",
            x.nrows(),
            x.ncols()
        )));
    }
    match a.form() {
        Form::Canonical { block_dims } => {
            let offsets = a.block_offsets();
            let blocks = offsets
                .iter()
                .zip(block_dims)
                .map(|(&off, &n)| x.view((off, off), (n, n)).clone_owned())
                .collect();
            Ok(AlgebraElement {
                owner: a.clone(),
                data: ElementData::Blocks(blocks),
            })
        }
        Form::Subalgebra { basis, .. } => {
            let mut proj = CMat::zeros(d, d);
            for q in basis {
                proj += q * frob_inner(q, x);
            }
            Ok(AlgebraElement {
                owner: a.clone(),
                data: ElementData::Ambient(proj),
            })
        }
    }
}

/// A pair of self-adjoint idempotents in A with ‖[P,Q]‖ > tol, or None when
/// the algebra is commutative. The projections sit inside one full-matrix
/// summand located by the Wedderburn decomposition.
pub fn find_noncommuting_projections(
    a: &MatrixAlgebra,
    tol: f64,
) -> Result<Option<(AlgebraElement, AlgebraElement)>> {
    if is_commutative(a, tol) {
        return Ok(None);
    }
    let data = wedderburn_decompose(a, DEFAULT_TOL.min(tol), 0x9a7e_11d3)?;
    let s = data
        .block_dims
        .iter()
        .position(|&n| n >= 2)
        .expect("noncommutative algebra has a block of size >= 2");
    let n = data.block_dims[s];

    // P = e11 of the located block, Q = projection onto (e1+e2)/√2.
    let mut p_blocks: Vec<CMat> = data.block_dims.iter().map(|&k| CMat::zeros(k, k)).collect();
    p_blocks[s][(0, 0)] = C_ONE;
    let mut q_blocks = p_blocks.clone();
    q_blocks[s] = CMat::zeros(n, n);
    let half = Complex64::new(0.5, 0.0);
    q_blocks[s][(0, 0)] = half;
    q_blocks[s][(0, 1)] = half;
    q_blocks[s][(1, 0)] = half;
    q_blocks[s][(1, 1)] = half;

    let (p, q) = match a.form() {
        Form::Canonical { .. } => {
            // change_of_basis is a block permutation; map summand index back
            // to the original block and build the element directly.
            let dims = a.block_dims().unwrap();
            let mut order: Vec<usize> = (0..dims.len()).collect();
            order.sort_by_key(|&i| (std::cmp::Reverse(dims[i]), i));
            let orig = order[s];
            let build = |corner: &CMat| {
                let mut blocks: Vec<CMat> = dims.iter().map(|&k| CMat::zeros(k, k)).collect();
                blocks[orig] = corner.clone();
                AlgebraElement {
                    owner: a.clone(),
                    data: ElementData::Blocks(blocks),
                }
            };
            (build(&p_blocks[s]), build(&q_blocks[s]))
        }
        Form::Subalgebra { .. } => {
            let p_amb = data.from_canonical_blocks(&p_blocks);
            let q_amb = data.from_canonical_blocks(&q_blocks);
            (
                AlgebraElement {
                    owner: a.clone(),
                    data: ElementData::Ambient(p_amb),
                },
                AlgebraElement {
                    owner: a.clone(),
                    data: ElementData::Ambient(q_amb),
                },
            )
        }
    };
    debug_assert!((&(&p * &q) - &(&q * &p)).op_norm() > tol);
    Ok(Some((p, q)))
}

/// Random element with standard complex Gaussian coefficients; used by
/// property tests and the see-saw initializer.
pub fn random_element(a: &MatrixAlgebra, seed: u64) -> AlgebraElement {
    let mut rng = rng_from(seed);
    match a.form() {
        Form::Canonical { block_dims } => AlgebraElement {
            owner: a.clone(),
            data: ElementData::Blocks(
                block_dims
                    .iter()
                    .map(|&n| gaussian_matrix(&mut rng, n, n))
                    .collect(),
            ),
        },
        Form::Subalgebra { ambient_dim, basis } => {
            let mut m = CMat::zeros(*ambient_dim, *ambient_dim);
            for b in basis {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                m += b * Complex64::new(re, im);
            }
            AlgebraElement {
                owner: a.clone(),
                data: ElementData::Ambient(m),
            }
        }
    }
}

/// Random self-adjoint element with unit operator norm.
pub fn random_self_adjoint_contraction(a: &MatrixAlgebra, seed: u64) -> AlgebraElement {
    let x = random_element(a, seed);
    let h = (&x + &x.adjoint()).scale(0.5);
    let n = h.op_norm();
    if n < 1e-14 {
        a.identity_element()
    } else {
        h.scale(1.0 / n)
    }
}

/// Random Haar-ish unitary from the QR of a Gaussian matrix.
pub fn random_unitary(d: usize, seed: u64) -> CMat {
    let mut rng = rng_from(seed);
    let g = gaussian_matrix(&mut rng, d, d);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix phases so the distribution is Haar.
    let mut out = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C_ONE };
        for i in 0..d {
            out[(i, j)] *= phase.conj();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;

    fn pauli_x() -> CMat {
        CMat::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO])
    }

    fn pauli_z() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[C_ONE, C_ZERO, C_ZERO, Complex64::new(-1.0, 0.0)],
        )
    }

    #[test]
    fn make_algebra_examples() {
        let c2 = make_algebra(&[1, 1]).unwrap();
        assert_eq!(c2.ambient_dim(), 2);
        assert_eq!(c2.linear_dim(), 2);

        let m2 = make_algebra(&[2]).unwrap();
        assert_eq!(m2.linear_dim(), 4);

        let mixed = make_algebra(&[1, 2]).unwrap();
        assert_eq!(mixed.linear_dim(), 5);
        assert_eq!(mixed.ambient_dim(), 3);

        assert!(make_algebra(&[]).is_err());
        assert!(make_algebra(&[1, 0]).is_err());
    }

    #[test]
    fn op_norm_examples() {
        let m3 = make_algebra(&[3]).unwrap();
        assert!((m3.identity_element().op_norm() - 1.0).abs() < 1e-12);

        let c2 = make_algebra(&[1, 1]).unwrap();
        let x = AlgebraElement::from_blocks(
            &c2,
            vec![
                CMat::from_element(1, 1, Complex64::new(3.0, 0.0)),
                CMat::from_element(1, 1, Complex64::new(-4.0, 0.0)),
            ],
        )
        .unwrap();
        assert!((x.op_norm() - 4.0).abs() < 1e-12);

        // Shift block: singular values {1, 0}.
        let m2 = make_algebra(&[2]).unwrap();
        let mut blk = CMat::zeros(2, 2);
        blk[(0, 1)] = C_ONE;
        let shift = AlgebraElement::from_blocks(&m2, vec![blk]).unwrap();
        assert!((shift.op_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cstar_identity_on_random_elements() {
        let a = make_algebra(&[2, 3, 1]).unwrap();
        for s in 0..200 {
            let x = random_element(&a, s);
            let lhs = (&x.adjoint() * &x).op_norm();
            let rhs = x.op_norm().powi(2);
            assert!(
                (lhs - rhs).abs() <= 1e-9 * rhs.max(1e-300),
                "C* identity failed: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn commutativity_examples() {
        assert!(is_commutative(&make_algebra(&[1, 1, 1]).unwrap(), 1e-9));
        assert!(!is_commutative(&make_algebra(&[2]).unwrap(), 1e-9));
        assert!(!is_commutative(&make_algebra(&[1, 2]).unwrap(), 1e-9));
    }

    #[test]
    fn generated_algebra_examples() {
        // No generators: scalars.
        let scalars = generated_star_algebra(3, &[], 1e-9).unwrap();
        assert_eq!(scalars.linear_dim(), 1);

        // One Pauli: span{I, X}, commutative since X² = I.
        let with_x = generated_star_algebra(2, &[pauli_x()], 1e-9).unwrap();
        assert_eq!(with_x.linear_dim(), 2);
        assert!(is_commutative(&with_x, 1e-9));

        // Two Paulis generate all of M₂.
        let full = generated_star_algebra(2, &[pauli_x(), pauli_z()], 1e-9).unwrap();
        assert_eq!(full.linear_dim(), 4);
        assert!(!is_commutative(&full, 1e-9));
    }

    #[test]
    fn commutant_examples() {
        // M₂ in ambient 2 → scalars (Schur).
        let m2 = generated_star_algebra(2, &[pauli_x(), pauli_z()], 1e-9).unwrap();
        assert_eq!(commutant(&m2, 1e-9).unwrap().linear_dim(), 1);

        // Diagonal algebra in ambient 2 → itself.
        let diag = make_algebra(&[1, 1]).unwrap();
        let comm = commutant(&diag, 1e-9).unwrap();
        assert_eq!(comm.linear_dim(), 2);

        // Scalars in ambient n → everything.
        let scalars = generated_star_algebra(3, &[], 1e-9).unwrap();
        assert_eq!(commutant(&scalars, 1e-9).unwrap().linear_dim(), 9);
    }

    #[test]
    fn double_commutant_equals_generated() {
        for seed in 0..12u64 {
            let d = 2 + (seed % 4) as usize; // ambient 2..=5
            let mut rng = rng_from(child_seed(1000, seed));
            let gens: Vec<CMat> = (0..1 + (seed % 2) as usize)
                .map(|_| gaussian_matrix(&mut rng, d, d))
                .collect();
            let alg = generated_star_algebra(d, &gens, 1e-9).unwrap();
            let bicomm = commutant(&commutant(&alg, 1e-9).unwrap(), 1e-9).unwrap();
            assert_eq!(alg.linear_dim(), bicomm.linear_dim());
            // Same span: every basis element of one lies in the other.
            let b1 = alg.ambient_basis();
            let b2 = bicomm.ambient_basis();
            for m in &b1 {
                assert!(span_residual(&b2, m) < 1e-7);
            }
        }
    }

    #[test]
    fn wedderburn_on_projection_span() {
        // span{I, diag(1,1,0)} closes to the two projections diag(1,1,0),
        // diag(0,0,1): blocks [1,1] with multiplicities [2,1].
        let mut p = CMat::zeros(3, 3);
        p[(0, 0)] = C_ONE;
        p[(1, 1)] = C_ONE;
        let alg = generated_star_algebra(3, &[p], 1e-9).unwrap();
        assert_eq!(alg.linear_dim(), 2);
        let data = wedderburn_decompose(&alg, 1e-9, 7).unwrap();
        assert_eq!(data.block_dims, vec![1, 1]);
        let mut mults = data.multiplicities.clone();
        mults.sort_unstable();
        assert_eq!(mults, vec![1, 2]);
    }

    #[test]
    fn wedderburn_on_pauli_generators() {
        let alg = generated_star_algebra(2, &[pauli_x(), pauli_z()], 1e-9).unwrap();
        let data = wedderburn_decompose(&alg, 1e-9, 3).unwrap();
        assert_eq!(data.block_dims, vec![2]);
        assert_eq!(data.multiplicities, vec![1]);
    }

    #[test]
    fn wedderburn_recovers_conjugated_canonical_form() {
        // Conjugate canonical C ⊕ M₂ by a random unitary; the algorithm must
        // recover block dims [2, 1].
        let a = make_algebra(&[1, 2]).unwrap();
        let u = random_unitary(3, 99);
        let gens: Vec<CMat> = a
            .ambient_basis()
            .iter()
            .map(|b| &u * b * u.adjoint())
            .collect();
        let alg = generated_star_algebra(3, &gens, 1e-9).unwrap();
        assert_eq!(alg.linear_dim(), 5);
        let data = wedderburn_decompose(&alg, 1e-9, 21).unwrap();
        assert_eq!(data.block_dims, vec![2, 1]);
        assert_eq!(data.multiplicities, vec![1, 1]);

        // Central projections: orthogonal idempotents summing to 1.
        let d = a.ambient_dim();
        let mut total = CMat::zeros(d, d);
        for p in &data.central_projections {
            let pm = p.ambient_matrix();
            assert!((&pm * &pm - &pm).norm() < 1e-8);
            assert!((&pm - pm.adjoint()).norm() < 1e-8);
            total += pm;
        }
        assert!((total - CMat::identity(d, d)).norm() < 1e-8);
    }

    #[test]
    fn wedderburn_handles_multiplicity_two_factor() {
        // M₂ ⊗ 1₂ inside M₄: blocks [2] with multiplicity 2.
        let i2 = CMat::identity(2, 2);
        let gens = vec![kron(&pauli_x(), &i2), kron(&pauli_z(), &i2)];
        let alg = generated_star_algebra(4, &gens, 1e-9).unwrap();
        assert_eq!(alg.linear_dim(), 4);
        let data = wedderburn_decompose(&alg, 1e-9, 5).unwrap();
        assert_eq!(data.block_dims, vec![2]);
        assert_eq!(data.multiplicities, vec![2]);
        for g in &gens {
            assert!(data.structure_residual(g) < 1e-8);
        }
    }

    #[test]
    fn conditional_expectation_examples() {
        // Onto the diagonal algebra: keeps the diagonal.
        let diag = make_algebra(&[1, 1]).unwrap();
        let x = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.5),
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(4.0, -0.5),
            ],
        );
        let e = conditional_expectation(&x, &diag).unwrap();
        assert!((e.block(0)[(0, 0)] - Complex64::new(1.0, 0.5)).norm() < 1e-14);
        assert!((e.block(1)[(0, 0)] - Complex64::new(4.0, -0.5)).norm() < 1e-14);

        // Idempotence on members.
        let again = conditional_expectation(&e.ambient_matrix(), &diag).unwrap();
        assert!((&again - &e).op_norm() < 1e-14);

        // Pauli X onto the scalars is zero (traceless).
        let scalars = generated_star_algebra(2, &[], 1e-9).unwrap();
        let ex = conditional_expectation(&pauli_x(), &scalars).unwrap();
        assert!(ex.op_norm() < 1e-14);
    }

    #[test]
    fn conditional_expectation_is_trace_dual() {
        // tr(a†·x) = tr(a†·E(x)) for all a in A, on a basis.
        let a = generated_star_algebra(3, &[gaussian_matrix(&mut rng_from(4), 3, 3)], 1e-9)
            .unwrap();
        let x = gaussian_matrix(&mut rng_from(5), 3, 3);
        let e = conditional_expectation(&x, &a).unwrap().ambient_matrix();
        for b in a.ambient_basis() {
            let lhs = frob_inner(&b, &x);
            let rhs = frob_inner(&b, &e);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn noncommuting_projections_examples() {
        let c2 = make_algebra(&[1, 1]).unwrap();
        assert!(find_noncommuting_projections(&c2, 1e-9)
            .unwrap()
            .is_none());

        let m2 = make_algebra(&[2]).unwrap();
        let (p, q) = find_noncommuting_projections(&m2, 1e-9).unwrap().unwrap();
        assert!(p.is_self_adjoint(1e-12));
        assert!((&(&p * &p) - &p).op_norm() < 1e-12);
        assert!((&(&q * &q) - &q).op_norm() < 1e-12);
        let comm_norm = (&(&p * &q) - &(&q * &p)).op_norm();
        assert!((comm_norm - 0.5).abs() < 1e-12, "got {comm_norm}");

        // C ⊕ M₃: projections land in the M₃ block.
        let a = make_algebra(&[1, 3]).unwrap();
        let (p, q) = find_noncommuting_projections(&a, 1e-9).unwrap().unwrap();
        assert!(p.block(0).norm() < 1e-14);
        assert!(q.block(0).norm() < 1e-14);
        assert!((&(&p * &q) - &(&q * &p)).op_norm() > 1e-9);
    }

    #[test]
    fn noncommuting_projections_cross_check_commutativity() {
        // All block_dims lists over {1,2,3} of length ≤ 3.
        let choices = [1usize, 2, 3];
        let mut lists: Vec<Vec<usize>> = Vec::new();
        for &a in &choices {
            lists.push(vec![a]);
            for &b in &choices {
                lists.push(vec![a, b]);
                for &c in &choices {
                    lists.push(vec![a, b, c]);
                }
            }
        }
        for dims in lists {
            let alg = make_algebra(&dims).unwrap();
            let found = find_noncommuting_projections(&alg, 1e-9).unwrap();
            assert_eq!(found.is_none(), is_commutative(&alg, 1e-9), "dims {dims:?}");
        }
    }

    #[test]
    fn element_membership_check() {
        let m2 = make_algebra(&[1, 1]).unwrap();
        let mut off = CMat::zeros(2, 2);
        off[(0, 1)] = C_ONE;
        assert!(AlgebraElement::from_ambient(&m2, &off, 1e-9).is_err());
        let diag = CMat::identity(2, 2);
        assert!(AlgebraElement::from_ambient(&m2, &diag, 1e-9).is_ok());
    }
}
