//! Finite and almost-commutative spectral triples as explicit matrix data.
//!
//! The crate builds the operators of a finite spectral triple, checks the
//! axioms, classifies real structures, derives the gauge content, computes
//! Connes distances, and certifies heat-kernel and fermionic-action
//! identities of the electrodynamics model numerically.

pub mod cli;
pub mod clifford;
pub mod distance;
pub mod fermionic;
pub mod finite_triple;
pub mod gauge;
pub mod linalg;
pub mod rng;
pub mod spectral_action;

pub use linalg::{CMatrix, Tolerance, C64};
