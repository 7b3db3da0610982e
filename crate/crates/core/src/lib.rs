//! Harmonic maps from the Riemann sphere into U(n) of finite uniton number.
//!
//! An echelon array of meromorphic vector functions determines a chain of
//! subbundles `α₁, …, α_r` and hence a harmonic map
//! `φ = Q (π₁ − π₁^⊥) ⋯ (π_r − π_r^⊥)`. The crate builds these maps pointwise,
//! deforms arrays along the flow `t ↦ ℋ(t)` toward their diagonal limit, and
//! checks harmonicity, the extended-solution structure and the loop-group
//! identities numerically.

pub mod cxlinalg;
pub mod error;
pub mod golden;
pub mod harmonic_builder;
pub mod lemma_oracles;
pub mod ratfun;
pub mod reports;
pub mod sampling;
pub mod spectral_flow;
pub mod uniton_array;
pub mod verifier;

pub use error::{Error, Result};
