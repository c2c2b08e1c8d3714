//! Loops with nilpotent negative modes: truncated nil-Laurent series, the
//! evaluation pullback, residue and transgression `τ`, the Radon transform
//! `d⁻¹τ`, Hessian extraction, rational multi-pole loops and additivity.

mod evaluator;
mod laurent;
mod point;
mod poles;
mod transgression;

use thiserror::Error;

use crate::forms::FormError;
use crate::superalg::AlgError;

pub use evaluator::{
    evaluate_at, hessian_form, hessian_matrix, psi_n_scaling_check, round_trip_check,
    skew_symmetry_check, tangential_form, taylor_profile, LoopFunction, TaylorProfile,
};
pub use laurent::NilLaurent;
pub use point::{mode_name, LoopContext, LoopPoint, LoopSpace, DT};
pub use poles::{
    additivity_check, cyclic_sum_check, degenerate_check, degenerate_pole_family,
    expand_rational_loop, lambda_expansion, omega_psi_check, partial_fraction_weight,
    residue_name, standard_family, AdditivityReport, DegenerateFamily, Location, Pole,
    PoleFamily, LAMBDA,
};
pub use transgression::{
    chain_map_check, ev_pullback, radon, residue, transgress, FormLaurent, CHAIN_MAP_SIGN,
};

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("insufficient validity window: {0}")]
    Window(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("negative mode is not nilpotent: {0}")]
    NotNilpotent(String),
    #[error("pole locations coincide: {0}")]
    PoleCollision(String),
    #[error("pole separation is not invertible: {0}")]
    Separation(String),
    #[error("structural failure: {0}")]
    Structure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Form(#[from] FormError),
}
