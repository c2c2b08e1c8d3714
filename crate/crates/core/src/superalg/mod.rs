//! Super-commutative polynomial algebra over exact rationals.
//!
//! Generators are even or odd, optionally nilpotent (`x^cap = 0`) or
//! invertible. Every polynomial is kept in canonical form: monomials are
//! exponent vectors in the context's canonical order and all Koszul signs
//! are folded into the coefficients.

mod context;
mod derivation;
mod poly;
mod subst;
mod supermatrix;

pub use context::{Context, Ctx, Monomial, Parity, VarSpec};
pub use derivation::Derivation;
pub use poly::{normalize_monomial, SuperPoly};
pub use subst::{invert, invert_unit, Substitution};
pub use supermatrix::{berezinian, SuperMatrix};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("invalid declaration: {0}")]
    InvalidSpec(String),
    #[error("operands belong to different contexts")]
    ContextMismatch,
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("image of `{0}` violates its nilpotency cap")]
    CapViolation(String),
    #[error("negative power of non-invertible `{0}`")]
    NegativePower(String),
    #[error("not a unit: {0}")]
    NotAUnit(String),
    #[error("not nilpotent: {0}")]
    NotNilpotent(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}
