//! Finite-dimensional operator algebras and the structures built on them:
//! tensor products with block states, CHSH functionals with see-saw
//! maximization, GNS representations, and separability certificates.

/// Ambient-dimension cap for the see-saw and decomposition searches. A
/// scale guard, not a semantic limit: the dense eigensolves behind each
/// sweep stop being desk-scale beyond this size.
pub const AMBIENT_CAP: usize = 64;

pub mod algebra;
pub mod chsh;
pub mod embed;
pub mod error;
mod exec;
pub mod gns;
pub mod linalg;
pub mod sep;
pub mod tensor;
pub mod wire;

pub use error::{Error, Result};
