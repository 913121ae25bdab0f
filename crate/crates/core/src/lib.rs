//! Ground-state engine for the spin-1 XXZ chain with single-ion anisotropy.
//!
//! Computes ground states by exact diagonalization (sector-restricted
//! Lanczos) and finite-system two-site DMRG, evaluates ground-state fidelity,
//! fidelity susceptibility and half-chain entanglement entropy across
//! parameter sweeps, and extracts critical points and exponents by
//! finite-size scaling.

pub mod error;
pub mod exact;
pub mod lanczos;
pub mod model;

pub use error::{Error, Result};
