//! The near-point construction `A ↦ A^𝔬` for a local super-algebra `𝔬`,
//! the `Der(𝔬)` action on it, and finite slices of the bigraded complex
//! for `𝔬 = Λ[η₁, η₂]`.

mod algebra;
mod context;
mod der;
pub mod slice;

use thiserror::Error;

use crate::forms::FormError;
use crate::superalg::AlgError;

pub use algebra::LocalSuperAlgebra;
pub use context::{weil_name, WeilContext, WeilElement};
pub use der::{
    abstract_bracket_table, decompose, der_commutator, der_o_basis, group_bracket,
    induced_bracket_check, quotient_matrix, sl12_structure_check, supertrace, BracketEntry,
    DerElement, Sl12Report,
};

#[derive(Debug, Error)]
pub enum WeilError {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("not a derivation: {0}")]
    NotADerivation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("slice too large: {size} basis elements exceed the limit {max}")]
    TooLarge { size: usize, max: usize },
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Form(#[from] FormError),
}
