//! Rectangular-lattice GKP protection against the protocol's asymmetric
//! displacement noise.
//!
//! With `κ_H = κ_S = 1` the channel displaces by `δq ~ N(0, 1/(ηG))` and
//! `δp ~ N(0, 1/((1−η)G))`. A rectangular single-qubit GKP code with
//! spacing ratio `L_q/L_p = √((1−η)/η)` corrects any displacement inside
//! `[−L_q/2, L_q/2] × [−L_p/2, L_p/2]`, so the logical error probability is
//! at most `1 − erf(a)²` with `a = √(Gπ)(η(1−η))^{1/4}`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::sampling::par_chunks;
use crate::{Error, Result};

pub const MIN_MC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GkpLattice {
    pub l_q: f64,
    pub l_p: f64,
}

impl GkpLattice {
    /// Half-widths of the correctable cell, `(L_q/2, L_p/2)`.
    pub fn half_widths(&self) -> (f64, f64) {
        (self.l_q / 2.0, self.l_p / 2.0)
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::param("eta", eta, "in (0, 1)"))
    }
}

fn check_gain(gain: f64) -> Result<()> {
    if gain >= 1.0 && !gain.is_nan() {
        Ok(())
    } else {
        Err(Error::param("gain", gain, "≥ 1"))
    }
}

/// Spacings `L_q = r^{1/4} 2√(2π)`, `L_p = r^{−1/4} 2√(2π)` with `r = (1−η)/η`.
pub fn gkp_spacings(eta: f64) -> Result<GkpLattice> {
    check_eta(eta)?;
    let base = 2.0 * (2.0 * PI).sqrt();
    let r = ((1.0 - eta) / eta).powf(0.25);
    Ok(GkpLattice {
        l_q: r * base,
        l_p: base / r,
    })
}

/// `1 − erf(a)²` with `a = √(Gπ)(η(1−η))^{1/4}`, evaluated as
/// `erfc(a)(2 − erfc(a))` so small probabilities keep full relative
/// precision.
pub fn gkp_error_bound(eta: f64, gain: f64) -> Result<f64> {
    check_eta(eta)?;
    check_gain(gain)?;
    if gain.is_infinite() {
        return Ok(0.0);
    }
    let a = (gain * PI).sqrt() * (eta * (1.0 - eta)).powf(0.25);
    let c = libm::erfc(a);
    Ok(c * (2.0 - c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GkpEstimate {
    pub p_hat: f64,
    pub std_error: f64,
}

/// Fraction of sampled displacements falling outside the correctable cell,
/// with its binomial standard error.
pub fn gkp_error_mc(eta: f64, gain: f64, n_samples: usize, seed: u64) -> Result<GkpEstimate> {
    check_eta(eta)?;
    check_gain(gain)?;
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n_samples,
            min: MIN_MC_SAMPLES,
        });
    }
    let (wq, wp) = gkp_spacings(eta)?.half_widths();
    let sq = (eta * gain).sqrt().recip();
    let sp = ((1.0 - eta) * gain).sqrt().recip();
    let failures: u64 = par_chunks(n_samples, seed, 0, |rng, len| {
        let mut bad = 0u64;
        for _ in 0..len {
            let dq: f64 = sq * rng.sample::<f64, _>(StandardNormal);
            let dp: f64 = sp * rng.sample::<f64, _>(StandardNormal);
            if dq.abs() >= wq || dp.abs() >= wp {
                bad += 1;
            }
        }
        bad
    })
    .into_iter()
    .sum();
    let n = n_samples as f64;
    let p_hat = failures as f64 / n;
    Ok(GkpEstimate {
        p_hat,
        std_error: (p_hat * (1.0 - p_hat) / n).sqrt(),
    })
}
