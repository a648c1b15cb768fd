use thiserror::Error;

/// Errors raised by algebra construction and state operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A presentation violates its structural invariants (zero block sizes,
    /// non-closed basis, inconsistent dimensions).
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    /// An element or state was used with an algebra it does not belong to.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// An operation precondition (self-adjointness, contractivity,
    /// projection identities) failed beyond tolerance.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// No copy of the 2x2 matrix algebra embeds; the algebra is commutative
    /// or the requested construction is degenerate.
    #[error("no embedding: {0}")]
    NoEmbedding(String),

    /// A state failed positivity or normalization checks.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A numerical procedure exhausted its retry budget or lost rank.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
