//! Two-polariton states of a finite qubit array coupled to a waveguide.
//!
//! The crate builds the hard-core two-excitation problem for the Markovian
//! waveguide Hamiltonian `H_mn = -i Γ₀ exp(i φ |m - n|)`, solves it densely,
//! analyses eigenstates in momentum space, and implements the reflection map
//! on pair momenta whose orbit size predicts whether a state is regular,
//! chaotic or fermionized. The infinite-array Bethe construction lives in
//! [`bethe`].
//!
//! All energies are in units of Γ₀ and measured from twice the qubit
//! resonance.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bethe;
pub mod cli;
pub mod error;
pub mod map;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{ArrayParams, ComplexMatrix, PairBasis, TridiagonalInverse};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
