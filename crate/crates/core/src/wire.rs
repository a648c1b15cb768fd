//! JSON wire formats. Complex matrices travel as nested arrays of
//! [re, im] pairs, row-major; algebras as either a block list or an
//! ambient dimension with generators; states as weights plus per-block
//! densities. Every bundle carries enough data for bit-independent
//! re-verification by a third party.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{generated_star_algebra, AlgebraElement, MatrixAlgebra};
use crate::chsh::{ChshObservables, ChshReport};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::sep::{Decomposition, DecompositionTerm};
use crate::tensor::{State, TensorAlgebra};

/// A complex matrix as rows of [re, im] entries.
pub type MatWire = Vec<Vec<[f64; 2]>>;

pub fn mat_to_wire(m: &CMat) -> MatWire {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn mat_from_wire(w: &MatWire) -> Result<CMat> {
    let rows = w.len();
    if rows == 0 {
        return Err(Error::InvalidPresentation("empty matrix".into()));
    }
    let cols = w[0].len();
    if w.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidPresentation("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| {
        Complex64::new(w[i][j][0], w[i][j][1])
    }))
}

/// An algebra presentation: canonical block list, or generators inside an
/// ambient matrix space (closed up to a *-algebra on load).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraWire {
    Canonical {
        label: String,
        blocks: Vec<usize>,
    },
    Generated {
        label: String,
        ambient: usize,
        generators: Vec<MatWire>,
    },
}

impl AlgebraWire {
    pub fn to_algebra(&self, tol: f64) -> Result<MatrixAlgebra> {
        match self {
            AlgebraWire::Canonical { label, blocks } => {
                MatrixAlgebra::canonical(label.clone(), blocks)
            }
            AlgebraWire::Generated {
                label,
                ambient,
                generators,
            } => {
                let gens = generators
                    .iter()
                    .map(mat_from_wire)
                    .collect::<Result<Vec<_>>>()?;
                Ok(generated_star_algebra(*ambient, &gens, tol)?.relabel(label.clone()))
            }
        }
    }

    pub fn from_algebra(a: &MatrixAlgebra) -> Self {
        match a.block_dims() {
            Some(dims) => AlgebraWire::Canonical {
                label: a.label().to_string(),
                blocks: dims.to_vec(),
            },
            None => AlgebraWire::Generated {
                label: a.label().to_string(),
                ambient: a.ambient_dim(),
                generators: a.ambient_basis().iter().map(mat_to_wire).collect(),
            },
        }
    }
}

/// Tensor-algebra payload: factor labels plus the pair-index table mapping
/// product block positions to factor block pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorAlgebraWire {
    pub left_label: String,
    pub right_label: String,
    pub product_blocks: Vec<usize>,
    pub pair_index: Vec<(usize, usize)>,
}

impl TensorAlgebraWire {
    pub fn from_tensor(t: &TensorAlgebra) -> Self {
        TensorAlgebraWire {
            left_label: t.left().label().to_string(),
            right_label: t.right().label().to_string(),
            product_blocks: t.product().block_dims().unwrap().to_vec(),
            pair_index: t.pairs().to_vec(),
        }
    }
}

/// Representation payload: basis images on the carrier space plus the
/// cyclic vector when one exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentationWire {
    pub carrier_dim: usize,
    pub images: Vec<MatWire>,
    pub cyclic_vector: Option<Vec<[f64; 2]>>,
}

impl RepresentationWire {
    pub fn from_representation(pi: &crate::gns::Representation) -> Self {
        RepresentationWire {
            carrier_dim: pi.carrier_dim(),
            images: pi.images().iter().map(mat_to_wire).collect(),
            cyclic_vector: pi
                .cyclic_vector()
                .map(|v| v.iter().map(|c| [c.re, c.im]).collect()),
        }
    }
}

/// State payload: block weights plus densities (null on weightless blocks).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateWire {
    pub weights: Vec<f64>,
    pub densities: Vec<Option<MatWire>>,
}

impl StateWire {
    pub fn from_state(s: &State) -> Self {
        StateWire {
            weights: s.weights().to_vec(),
            densities: (0..s.weights().len())
                .map(|b| s.density(b).map(mat_to_wire))
                .collect(),
        }
    }

    pub fn to_state(&self, owner: &MatrixAlgebra) -> Result<State> {
        let densities = self
            .densities
            .iter()
            .map(|d| d.as_ref().map(mat_from_wire).transpose())
            .collect::<Result<Vec<_>>>()?;
        State::new(owner, self.weights.clone(), densities)
    }
}

/// Element payload: the block matrices of a canonical-algebra element.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementWire {
    pub blocks: Vec<MatWire>,
}

impl ElementWire {
    pub fn from_element(e: &AlgebraElement) -> Self {
        ElementWire {
            blocks: e.blocks().iter().map(mat_to_wire).collect(),
        }
    }

    pub fn to_element(&self, owner: &MatrixAlgebra) -> Result<AlgebraElement> {
        let blocks = self
            .blocks
            .iter()
            .map(mat_from_wire)
            .collect::<Result<Vec<_>>>()?;
        AlgebraElement::from_blocks(owner, blocks)
    }
}

/// Observable quadruple payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChshObservablesWire {
    pub a: ElementWire,
    pub a_prime: ElementWire,
    pub b: ElementWire,
    pub b_prime: ElementWire,
}

impl ChshObservablesWire {
    pub fn from_observables(o: &ChshObservables) -> Self {
        ChshObservablesWire {
            a: ElementWire::from_element(&o.a),
            a_prime: ElementWire::from_element(&o.a_prime),
            b: ElementWire::from_element(&o.b),
            b_prime: ElementWire::from_element(&o.b_prime),
        }
    }

    pub fn to_observables(&self, t: &TensorAlgebra) -> Result<ChshObservables> {
        ChshObservables::new(
            self.a.to_element(t.left())?,
            self.a_prime.to_element(t.left())?,
            self.b.to_element(t.right())?,
            self.b_prime.to_element(t.right())?,
        )
    }
}

/// See-saw report payload, including the full observables so an external
/// checker can recompute the value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChshReportWire {
    pub observables: ChshObservablesWire,
    pub signs: (i8, i8),
    pub value: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

impl ChshReportWire {
    pub fn from_report(r: &ChshReport) -> Self {
        ChshReportWire {
            observables: ChshObservablesWire::from_observables(&r.observables),
            signs: r.signs,
            value: r.value,
            iterations: r.iterations,
            restarts_used: r.restarts_used,
            converged: r.converged,
            history: r.history.clone(),
        }
    }
}

/// One product term of a decomposition payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionTermWire {
    pub weight: f64,
    pub left: StateWire,
    pub right: StateWire,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionWire {
    pub terms: Vec<DecompositionTermWire>,
    pub residual: f64,
}

impl DecompositionWire {
    pub fn from_decomposition(d: &Decomposition) -> Self {
        DecompositionWire {
            terms: d
                .terms
                .iter()
                .map(|t| DecompositionTermWire {
                    weight: t.weight,
                    left: StateWire::from_state(&t.left),
                    right: StateWire::from_state(&t.right),
                })
                .collect(),
            residual: d.residual,
        }
    }

    pub fn to_decomposition(&self, t: &TensorAlgebra) -> Result<Decomposition> {
        let terms = self
            .terms
            .iter()
            .map(|w| {
                Ok(DecompositionTerm {
                    weight: w.weight,
                    left: w.left.to_state(t.left())?,
                    right: w.right.to_state(t.right())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Decomposition {
            terms,
            residual: self.residual,
        })
    }
}
