//! Exact super-commutative calculus.
//!
//! Polynomials over ℚ in even and odd generators, de Rham forms, the
//! near-point (Weil) construction with its `Der(𝔬)` action, and truncated
//! nil-Laurent loops with residues and transgression.

pub mod check;
pub mod forms;
pub mod linalg;
pub mod loops;
pub mod rational;
pub mod superalg;
pub mod weil;

pub use rational::Q;
pub use superalg::{AlgError, Context, Ctx, Derivation, Monomial, Parity, SuperPoly, VarSpec};
