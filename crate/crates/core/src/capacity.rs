//! Quantum-capacity bounds for the protocol's additive-noise channel and the
//! squeezing thresholds derived from them.
//!
//! Rates are in bits per channel use. Noise variances are in vacuum units
//! (ħ = 2), so the additive channel `A_v` adds `v` to each quadrature
//! variance.

use std::f64::consts::{E, LN_2};

use serde::Serialize;

use crate::protocol::{teleport_channel, ProtocolParams};
use crate::{linear_to_db, Error, Result};

/// Bisection bracket in linear gain.
pub const GAIN_BRACKET: (f64, f64) = (1.0, 1e6);

/// Bisection stopping width in linear gain.
pub const GAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Capacity of the pure-loss channel, `max[log₂(η/(1−η)), 0]`.
/// Returns `f64::INFINITY` at `η = 1`, where the capacity is unbounded.
pub fn pure_loss_capacity(eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param("eta", eta, "in [0, 1]"));
    }
    if eta == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((eta / (1.0 - eta)).log2().max(0.0))
}

/// Symmetric variance with the same capacity as `A_{var_q, var_p}`: the
/// geometric mean, since local squeezing can rebalance the quadratures.
pub fn sym_variance(var_q: f64, var_p: f64) -> Result<f64> {
    if !(var_q > 0.0) {
        return Err(Error::param("var_q", var_q, "> 0"));
    }
    if !(var_p > 0.0) {
        return Err(Error::param("var_p", var_p, "> 0"));
    }
    Ok((var_q * var_p).sqrt())
}

fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `h(x) = ((x+1)/2) log₂((x+1)/2) − ((x−1)/2) log₂((x−1)/2)`, `h(1) = 0`.
pub fn entropy_h(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::param("x", x, "≥ 1"));
    }
    Ok(xlog2x((x + 1.0) / 2.0) - xlog2x((x - 1.0) / 2.0))
}

fn check_variance(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param("v", v, "finite and > 0"))
    }
}

/// `−log₂(v/2) − 1/ln 2` before clamping at zero.
pub fn q_lb_unclamped(v: f64) -> Result<f64> {
    check_variance(v)?;
    Ok(-(v / 2.0).log2() - 1.0 / LN_2)
}

/// `−log₂(v/2) − 1/ln 2 + 2h(√(1 + v²/4))` before clamping at zero.
pub fn q_ub_unclamped(v: f64) -> Result<f64> {
    Ok(q_lb_unclamped(v)? + 2.0 * entropy_h((1.0 + v * v / 4.0).sqrt())?)
}

/// Lower bound on `Q(A_v)`.
pub fn q_lb(v: f64) -> Result<f64> {
    Ok(q_lb_unclamped(v)?.max(0.0))
}

/// Upper bound on `Q(A_v)`.
pub fn q_ub(v: f64) -> Result<f64> {
    Ok(q_ub_unclamped(v)?.max(0.0))
}

fn check_open_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::param("eta", eta, "in (0, 1)"))
    }
}

/// Smallest gain with a positive lower bound, `e / (2√(η(1−η)))`.
pub fn g_star(eta: f64) -> Result<f64> {
    check_open_eta(eta)?;
    Ok(E / (2.0 * (eta * (1.0 - eta)).sqrt()))
}

/// Smallest gain at which the lower bound beats direct transduction:
/// `e√η / (2(1−η)^{3/2})` for `η ≥ 1/2`, otherwise [`g_star`].
pub fn g_star_adv(eta: f64) -> Result<f64> {
    check_open_eta(eta)?;
    if eta >= 0.5 {
        Ok(E * eta.sqrt() / (2.0 * (1.0 - eta).powf(1.5)))
    } else {
        g_star(eta)
    }
}

/// Smallest device efficiency with a positive lower bound at gain `gain`,
/// `(1 − √(1 − e²/G²))/2`.
pub fn eta_min_positive(gain: f64) -> Result<f64> {
    if !(gain >= E) || !gain.is_finite() {
        return Err(Error::param("gain", gain, "finite and ≥ e"));
    }
    let x = (E / gain).powi(2);
    // 1 − √(1 − x) rewritten as x / (1 + √(1 − x)) to keep precision at large G.
    Ok(0.5 * x / (1.0 + (1.0 - x).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    PositiveRate,
    AdvantageOverDirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdQuery {
    pub eta: f64,
    pub target: Target,
    pub bound: Bound,
}

/// Symmetric noise variance of the lossless protocol at gain `gain`.
fn ideal_variance(eta: f64, gain: f64) -> Result<f64> {
    let ch = teleport_channel(&ProtocolParams::ideal(eta, gain)?);
    sym_variance(ch.var_q, ch.var_p)
}

fn bound_unclamped(bound: Bound, v: f64) -> Result<f64> {
    match bound {
        Bound::Lower => q_lb_unclamped(v),
        Bound::Upper => q_ub_unclamped(v),
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoRoot {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Squeezing threshold in dB: the gain at which the chosen bound on the
/// lossless protocol's rate reaches the target rate (zero, or the direct
/// pure-loss capacity). Solved by bisection on the unclamped bound, since
/// the clamped one is flat below threshold.
pub fn gain_threshold(query: &ThresholdQuery) -> Result<f64> {
    check_open_eta(query.eta)?;
    let target_rate = match query.target {
        Target::PositiveRate => 0.0,
        Target::AdvantageOverDirect => pure_loss_capacity(query.eta)?,
    };
    let (lo, hi) = GAIN_BRACKET;
    let g = bisect(
        |g| Ok(bound_unclamped(query.bound, ideal_variance(query.eta, g)?)? - target_rate),
        lo,
        hi,
        GAIN_TOL,
    )?;
    Ok(linear_to_db(g))
}

/// Gain (dB) at which the upper bound on the lossless protocol's rate is
/// smallest, found by golden-section search over `log G` in the bisection
/// bracket. The upper-bound expression is not monotone in `v` and never
/// reaches zero, so this turning point is the closest it comes to a
/// positive-rate threshold; returns `(gain_db, bits)`.
pub fn upper_bound_stationary_gain_db(eta: f64) -> Result<(f64, f64)> {
    check_open_eta(eta)?;
    let f = |x: f64| ideal_variance(eta, x.exp()).and_then(q_ub_unclamped);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (GAIN_BRACKET.0.ln(), GAIN_BRACKET.1.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((linear_to_db(x.exp()), f(x)?))
}

/// Lower and upper rate bounds for the (possibly lossy) protocol.
pub fn protocol_rate_bounds(params: &ProtocolParams) -> Result<CapacityBounds> {
    let ch = teleport_channel(params);
    let v = sym_variance(ch.var_q, ch.var_p)?;
    Ok(CapacityBounds {
        lower: q_lb(v)?,
        upper: q_ub(v)?,
    })
}
