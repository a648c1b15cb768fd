//! GNS construction and representation-level separation: build the cyclic
//! representation of a state, decide irreducibility, take double commutants
//! of images, and check the canonical tensor factorization of the
//! von Neumann algebra generated by a product representation.

use num_complex::Complex64;

use crate::algebra::{
    generated_star_algebra, is_commutative, AlgebraElement, MatrixAlgebra,
};
use crate::error::{Error, Result};
use crate::linalg::{batch_span_residuals, eigh, orthonormalize, CMat, CVec, C_ZERO};
use crate::tensor::{State, TensorAlgebra};

/// Relative Gram-eigenvalue threshold below which GNS null directions are
/// dropped. The carrier dimension is rank-sensitive at this cutoff.
pub const GNS_NULL_TOL: f64 = 1e-10;

/// A *-representation given by the images of the source basis, with the
/// cyclic vector when the representation came from a state.
#[derive(Debug, Clone)]
pub struct Representation {
    source: MatrixAlgebra,
    carrier_dim: usize,
    images: Vec<CMat>,
    cyclic_vector: Option<CVec>,
}

impl Representation {
    /// The identity representation of a canonical algebra on its ambient
    /// space.
    pub fn identity(a: &MatrixAlgebra) -> Self {
        Representation {
            source: a.clone(),
            carrier_dim: a.ambient_dim(),
            images: a.ambient_basis(),
            cyclic_vector: None,
        }
    }

    pub fn source(&self) -> &MatrixAlgebra {
        &self.source
    }

    pub fn carrier_dim(&self) -> usize {
        self.carrier_dim
    }

    pub fn images(&self) -> &[CMat] {
        &self.images
    }

    pub fn cyclic_vector(&self) -> Option<&CVec> {
        self.cyclic_vector.as_ref()
    }

    /// π(x) by linear extension from the basis images.
    pub fn apply(&self, x: &AlgebraElement) -> Result<CMat> {
        if !self.source.compatible(x.owner()) {
            return Err(Error::DomainMismatch(
                "element does not belong to the represented algebra".into(),
            ));
        }
        let coeffs = self.source.basis_coefficients(x);
        let mut out = CMat::zeros(self.carrier_dim, self.carrier_dim);
        for (img, &c) in self.images.iter().zip(coeffs.iter()) {
            if c != C_ZERO {
                out += img * c;
            }
        }
        Ok(out)
    }

    /// Checks multiplicativity, *-preservation and unitality on the basis.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let basis = self.source.basis_elements();
        let id = self.apply(&self.source.identity_element())?;
        if (&id - CMat::identity(self.carrier_dim, self.carrier_dim)).norm() > tol {
            return Err(Error::ContractViolation(
                "identity does not map to the identity".into(),
            ));
        }
        for (i, a) in basis.iter().enumerate() {
            let star = self.apply(&a.adjoint())?;
            if (&star - self.images[i].adjoint()).norm() > tol {
                return Err(Error::ContractViolation(format!(
                    "image of basis element {i} is not *-preserved"
                )));
            }
            for b in &basis {
                let lhs = self.apply(&(a * b))?;
                let rhs = self.apply(a)? * self.apply(b)?;
                if (&lhs - &rhs).norm() > tol {
                    return Err(Error::ContractViolation(
                        "representation is not multiplicative on the basis".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// GNS construction: Gram matrix ω(a†b) on the basis, quotient by its null
/// space, left multiplication on the quotient, cyclic vector = class of the
/// identity. Satisfies ω(a) = ⟨Ω, π(a)Ω⟩ on the basis.
pub fn gns_construct(omega: &State, a: &MatrixAlgebra, tol: f64) -> Result<Representation> {
    if !omega.owner().compatible(a) {
        return Err(Error::DomainMismatch(
            "state does not live on the algebra".into(),
        ));
    }
    let basis = a.basis_elements();
    let k = basis.len();

    let mut gram = CMat::zeros(k, k);
    for (l, bl) in basis.iter().enumerate() {
        let bl_adj = bl.adjoint();
        for (m, bm) in basis.iter().enumerate() {
            gram[(l, m)] = omega.evaluate(&(&bl_adj * bm))?;
        }
    }
    let (vals, vecs) = eigh(&gram);
    let lam_max = vals.first().copied().unwrap_or(0.0).max(0.0);
    if lam_max <= 0.0 {
        return Err(Error::Numerical("GNS Gram matrix vanished".into()));
    }
    let cut = tol.max(f64::EPSILON) * lam_max;
    let kept: Vec<usize> = (0..k).filter(|&i| vals[i] > cut).collect();
    let r = kept.len();

    // T maps basis coefficients to orthonormal quotient coordinates;
    // R = V Λ^{-1/2} is a right inverse (null directions are irrelevant:
    // left multiplication preserves the null space by Cauchy-Schwarz).
    let mut t = CMat::zeros(r, k);
    let mut rinv = CMat::zeros(k, r);
    for (row, &i) in kept.iter().enumerate() {
        let sqrt = vals[i].sqrt();
        for c in 0..k {
            t[(row, c)] = vecs[(c, i)].conj() * sqrt;
            rinv[(c, row)] = vecs[(c, i)] / sqrt;
        }
    }

    // Structure constants: column m of mult[l] holds the coefficients of
    // b_l · b_m in the basis.
    let mut images = Vec::with_capacity(k);
    for bl in &basis {
        let mut mult = CMat::zeros(k, k);
        for (m, bm) in basis.iter().enumerate() {
            let prod = bl * bm;
            mult.set_column(m, &a.basis_coefficients(&prod));
        }
        images.push(&t * mult * &rinv);
    }

    let id_coeffs = a.basis_coefficients(&a.identity_element());
    let cyclic = &t * id_coeffs;

    Ok(Representation {
        source: a.clone(),
        carrier_dim: r,
        images,
        cyclic_vector: Some(cyclic),
    })
}

/// A representation is irreducible iff its image algebra has trivial
/// commutant; for a unital *-closed image at finite dimension this holds
/// exactly when the images span the full carrier matrix algebra.
pub fn is_irreducible(pi: &Representation, tol: f64) -> bool {
    let c = pi.carrier_dim;
    let mut mats = pi.images.clone();
    mats.push(CMat::identity(c, c));
    orthonormalize(&mats, tol.max(1e-12)).len() == c * c
}

/// The double commutant of the image: at finite dimension, the unital
/// *-algebra generated by the images.
pub fn image_double_commutant(pi: &Representation, tol: f64) -> Result<MatrixAlgebra> {
    generated_star_algebra(pi.carrier_dim, &pi.images, tol)
}

/// The representations of the factors induced by a product representation.
fn induced_images(pi: &Representation, t: &TensorAlgebra) -> Result<(Vec<CMat>, Vec<CMat>)> {
    if !pi.source.compatible(t.product()) {
        return Err(Error::DomainMismatch(
            "representation is not of the product algebra".into(),
        ));
    }
    let left = t
        .left()
        .basis_elements()
        .iter()
        .map(|x| pi.apply(&t.embed_left(x)))
        .collect::<Result<Vec<_>>>()?;
    let right = t
        .right()
        .basis_elements()
        .iter()
        .map(|y| pi.apply(&t.embed_right(y)))
        .collect::<Result<Vec<_>>>()?;
    Ok((left, right))
}

/// Canonical factorization check: π(A₁⊗A₂)″ must equal the algebra
/// generated by the products π₁(x)·π₂(y). Verified by dimension equality
/// plus mutual conditional-expectation residuals within `tol`.
pub fn check_tensor_factorization(
    pi: &Representation,
    t: &TensorAlgebra,
    tol: f64,
) -> Result<bool> {
    let lhs = image_double_commutant(pi, tol.min(1e-9))?;
    let (pi1, pi2) = induced_images(pi, t)?;
    let mut pair_products = Vec::with_capacity(pi1.len() * pi2.len());
    for x in &pi1 {
        for y in &pi2 {
            pair_products.push(x * y);
        }
    }
    let rhs = generated_star_algebra(pi.carrier_dim, &pair_products, tol.min(1e-9))?;

    if lhs.linear_dim() != rhs.linear_dim() {
        return Ok(false);
    }
    let lhs_basis = lhs.ambient_basis();
    let rhs_basis = rhs.ambient_basis();
    let thresh = tol.max(1e-12);
    let forward = batch_span_residuals(&rhs_basis, &lhs_basis);
    let backward = batch_span_residuals(&lhs_basis, &rhs_basis);
    Ok(forward.iter().chain(backward.iter()).all(|&r| r <= thresh))
}

/// Separation in a representation: the induced factor von Neumann algebras
/// π₁(A₁)″, π₂(A₂)″ form a W*-tensor product, separated iff one of them is
/// commutative.
pub fn separated_in_representation(
    pi: &Representation,
    t: &TensorAlgebra,
    tol: f64,
) -> Result<bool> {
    let (pi1, pi2) = induced_images(pi, t)?;
    let m1 = generated_star_algebra(pi.carrier_dim, &pi1, tol.min(1e-9))?;
    if is_commutative(&m1, tol) {
        return Ok(true);
    }
    let m2 = generated_star_algebra(pi.carrier_dim, &pi2, tol.min(1e-9))?;
    Ok(is_commutative(&m2, tol))
}

/// The irreducible representations of a canonical multi-matrix algebra,
/// enumerated directly as its block compressions (one per block, no search).
pub fn irreducible_representations(a: &MatrixAlgebra) -> Result<Vec<Representation>> {
    let dims = a.block_dims().ok_or_else(|| {
        Error::DomainMismatch("irreducible enumeration requires the canonical form".into())
    })?;
    let basis = a.basis_elements();
    Ok((0..dims.len())
        .map(|b| Representation {
            source: a.clone(),
            carrier_dim: dims[b],
            images: basis.iter().map(|e| e.block(b).clone()).collect(),
            cyclic_vector: None,
        })
        .collect())
}

/// GNS fidelity ⟨Ω, π(a)Ω⟩ of an element; test hook for ω(a) = ⟨Ω, π(a)Ω⟩.
pub fn gns_expectation(pi: &Representation, x: &AlgebraElement) -> Result<Complex64> {
    let omega = pi
        .cyclic_vector
        .as_ref()
        .ok_or_else(|| Error::InvalidState("representation has no cyclic vector".into()))?;
    let img = pi.apply(x)?;
    Ok((omega.adjoint() * img * omega)[(0, 0)])
}
