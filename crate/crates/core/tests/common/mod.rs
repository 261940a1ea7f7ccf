#![allow(dead_code)]

use cvqt_core::phase_space::{Axis, GaussianState, SymplecticOp};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Single-mode rotation by `theta` in the (q, p) plane.
pub fn rotation(theta: f64) -> SymplecticOp {
    let (c, s) = (theta.cos(), theta.sin());
    SymplecticOp::new(
        DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
        DVector::zeros(2),
    )
    .unwrap()
}

/// A random physical single-mode Gaussian state: rotated squeezed thermal
/// state with a random displacement.
pub fn random_single_mode<R: Rng>(rng: &mut R) -> GaussianState {
    let gain = 10f64.powf(rng.random_range(0.0..1.5));
    let thermal = rng.random_range(0.0..2.0);
    let theta = rng.random_range(0.0..std::f64::consts::PI);
    GaussianState::squeezed_vacuum(gain, Axis::Position)
        .unwrap()
        .additive_noise(0, thermal, thermal)
        .unwrap()
        .apply(&rotation(theta))
        .unwrap()
        .displace(0, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
        .unwrap()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}
