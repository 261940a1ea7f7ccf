//! Gaussian-state simulation of quantum transduction by generalized
//! continuous-variable teleportation.
//!
//! Units follow the ħ = 2 convention throughout: the vacuum has
//! `var(q) = var(p) = 1`, and phase-space vectors are ordered
//! `(q₁, p₁, …, q_N, p_N)`.
//!
//! - [`phase_space`]: Gaussian states, symplectic maps, Gaussian channels and
//!   homodyne conditioning.
//! - [`protocol`]: unbalanced EPR preparation, teleportation trajectories with
//!   feedforward, the closed-form additive-noise channel and its Monte Carlo
//!   estimate, entanglement swapping.
//! - [`capacity`]: quantum-capacity bounds and squeezing thresholds.
//! - [`gkp`]: rectangular-GKP error probability and a sampling oracle.

// `!(x >= a)` is the NaN-rejecting form of `x < a`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
mod error;
pub mod gkp;
pub mod phase_space;
pub mod protocol;
pub(crate) mod sampling;

pub use error::{Error, Result};
pub use phase_space::{Axis, GaussianState, Quadrature, SymplecticOp};
pub use protocol::{AdditiveNoiseSpec, ProtocolParams, TrajectoryRecord};

/// Converts a power-style decibel value to a linear gain, `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear gain to power-style decibels, `10·log₁₀(G)`.
pub fn linear_to_db(gain: f64) -> f64 {
    10.0 * gain.log10()
}
