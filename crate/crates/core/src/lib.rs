//! Regular generalized sampling in T-invariant subspaces of a Hilbert space.
//!
//! The ambient space is modelled as `ℂ^D` with an invertible operator `T`.
//! Four settings are covered:
//!
//! * [`cyclic`]: generators with `T^N a = a`, sample matrices `R_{a,b}`,
//!   structured left inverses and the resulting sampling formulas;
//! * [`spectral`]: the shift-infinite case in a desk model where all
//!   cross-correlations are finitely supported, with `G(w)` fields, dual
//!   fields and analysis/synthesis filter banks;
//! * [`laurent`]: exact rational Laurent polynomials, discrete B-splines and
//!   Bezout duals;
//! * [`lca`]: finite abelian groups, characters, annihilators and the group
//!   sampling formula.

pub mod cyclic;
pub mod error;
pub mod hilbert;
pub mod laurent;
pub mod lca;
pub mod linalg;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
pub use hilbert::{CMatrix, CVector, LinearOperator, C64};
