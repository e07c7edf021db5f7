//! Exact Haar-ensemble averages of the distance of a subsystem from its
//! equilibrium state under a random Hamiltonian `H = U H₀ U†`.
//!
//! The averages reduce to fourth-moment twirls `tr[A τ₄(B)] = ⟨a|M⁻¹|b⟩`,
//! where `M` is the Gram matrix of the permutation operators of S₄. The crate
//! is layered bottom-up:
//!
//! - [`permgroup`]: permutations, cycle structure, character tables of S₃/S₄.
//! - [`gram`]: exact Gram matrices, projectors, inverses and pseudoinverses.
//! - [`twirl`]: overlap vectors by cycle decomposition and twirl traces.
//! - [`spectrum`]: energy spectra with degeneracies and the spectrum file format.
//! - [`equilibrium`]: exact and leading-order averaged distances, time and
//!   Gaussian-ensemble averages.
//! - [`montecarlo`]: independent stochastic oracles (Haar sampling, explicit
//!   evolution, dephasing, partial traces).

pub mod dense;
pub mod equilibrium;
pub mod error;
pub mod exact;
pub mod gram;
pub mod montecarlo;
pub mod permgroup;
pub mod spectrum;
pub mod stats;
pub mod twirl;

pub use error::{Error, Result};

pub use num_complex::Complex64;
