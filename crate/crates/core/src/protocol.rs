//! Generalized CV teleportation used as a quantum transducer.
//!
//! Mode roles: `S` is the signal to transfer, `A` and `B` share the
//! unbalanced EPR state, and the transduction device is a beamsplitter of
//! ratio η between `A` and `S`. The sender homodynes momentum on `S′` and
//! position on `A′`; the receiver displaces `B` to obtain `B′`.
//!
//! Losses: `κ_S` acts on each squeezed input before the EPR mixer and
//! `κ_H` (device plus detector) acts on `S` and `A` before the device
//! beamsplitter. Placing it there is equivalent to placing it on `S′` and
//! `A′` because both arms see the same loss.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use serde::Serialize;

use crate::phase_space::{Axis, GaussianState, Quadrature, SymplecticOp};
use crate::sampling::par_chunks;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    eta: f64,
    gain: f64,
    kappa_h: f64,
    kappa_s: f64,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::param("eta", eta, "in (0, 1)"))
    }
}

fn check_gain(name: &'static str, gain: f64) -> Result<()> {
    if gain >= 1.0 && gain.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, gain, "finite and ≥ 1"))
    }
}

fn check_efficiency(name: &'static str, kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, kappa, "in (0, 1]"))
    }
}

impl ProtocolParams {
    pub fn new(eta: f64, gain: f64, kappa_h: f64, kappa_s: f64) -> Result<Self> {
        check_eta(eta)?;
        check_gain("gain", gain)?;
        check_efficiency("kappa_h", kappa_h)?;
        check_efficiency("kappa_s", kappa_s)?;
        Ok(ProtocolParams {
            eta,
            gain,
            kappa_h,
            kappa_s,
        })
    }

    /// Lossless configuration, `κ_H = κ_S = 1`.
    pub fn ideal(eta: f64, gain: f64) -> Result<Self> {
        Self::new(eta, gain, 1.0, 1.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn kappa_h(&self) -> f64 {
        self.kappa_h
    }

    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }

    /// Feedforward gains `(1/√(κ_H η), 1/√(κ_H (1−η)))`.
    fn feedforward(&self) -> (f64, f64) {
        (
            (self.kappa_h * self.eta).sqrt().recip(),
            (self.kappa_h * (1.0 - self.eta)).sqrt().recip(),
        )
    }
}

/// Added quadrature variances of an additive Gaussian noise channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdditiveNoiseSpec {
    pub var_q: f64,
    pub var_p: f64,
}

impl AdditiveNoiseSpec {
    pub fn apply(&self, state: &GaussianState, mode: usize) -> Result<GaussianState> {
        state.additive_noise(mode, self.var_q, self.var_p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Position outcome on `A′`.
    pub q_tilde: f64,
    /// Momentum outcome on `S′`.
    pub p_tilde: f64,
    /// Conditional output after feedforward; `B′` is the last mode.
    pub output: GaussianState,
}

/// Unbalanced EPR pair `(A, B)`: a position-squeezed and a
/// momentum-squeezed vacuum, each through loss `κ_S`, mixed so that
/// `A = √(1−η) in₁ + √η in₂` and `B = −√η in₁ + √(1−η) in₂`.
pub fn make_generalized_epr(eta: f64, gain: f64, kappa_s: f64) -> Result<GaussianState> {
    check_eta(eta)?;
    check_gain("gain", gain)?;
    check_efficiency("kappa_s", kappa_s)?;
    let (c, s) = ((1.0 - eta).sqrt(), eta.sqrt());
    let mixer = SymplecticOp::two_mode_passive([[c, s], [-s, c]], 0, 1, 2)?;
    GaussianState::squeezed_vacuum(gain, Axis::Position)?
        .tensor(&GaussianState::squeezed_vacuum(gain, Axis::Momentum)?)
        .loss(0, kappa_s)?
        .loss(1, kappa_s)?
        .apply(&mixer)
}

fn epr_directions(eta: f64) -> [DVector<f64>; 4] {
    let (c, s) = ((1.0 - eta).sqrt(), eta.sqrt());
    [
        DVector::from_vec(vec![c, 0.0, -s, 0.0]), // q₋
        DVector::from_vec(vec![0.0, s, 0.0, c]),  // p₊
        DVector::from_vec(vec![s, 0.0, c, 0.0]),  // q₊
        DVector::from_vec(vec![0.0, c, 0.0, -s]), // p₋
    ]
}

fn check_two_modes(state: &GaussianState) -> Result<()> {
    if state.num_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: state.num_modes(),
        });
    }
    Ok(())
}

/// Variances of the squeezed generalized EPR quadratures
/// `q₋ = √(1−η) q_A − √η q_B` and `p₊ = √η p_A + √(1−η) p_B`.
pub fn epr_variances(state: &GaussianState, eta: f64) -> Result<(f64, f64)> {
    check_two_modes(state)?;
    let [qm, pp, _, _] = epr_directions(eta);
    Ok((state.quadratic_form(&qm), state.quadratic_form(&pp)))
}

/// Variances of the orthogonal (anti-squeezed) combinations
/// `q₊ = √η q_A + √(1−η) q_B` and `p₋ = √(1−η) p_A − √η p_B`.
pub fn epr_antisqueezed_variances(state: &GaussianState, eta: f64) -> Result<(f64, f64)> {
    check_two_modes(state)?;
    let [_, _, qp, pm] = epr_directions(eta);
    Ok((state.quadratic_form(&qp), state.quadratic_form(&pm)))
}

/// Joint state right before the homodynes. With an `m`-mode input, modes
/// are `[input₀ … input_{m−2}, A′, S′, B]`: the device beamsplitter writes
/// `A′` into the signal's slot and `S′` into `A`'s slot.
fn measurement_state(params: &ProtocolParams, input: &GaussianState) -> Result<GaussianState> {
    let m = input.num_modes();
    let (sig, anc) = (m - 1, m);
    let joint = input.tensor(&make_generalized_epr(params.eta, params.gain, params.kappa_s)?);
    let n = joint.num_modes();
    joint
        .loss(sig, params.kappa_h)?
        .loss(anc, params.kappa_h)?
        .apply(&SymplecticOp::beamsplitter(params.eta, anc, sig, n)?)
}

fn correct(
    params: &ProtocolParams,
    pre: &GaussianState,
    q_tilde: f64,
    p_tilde: f64,
) -> Result<GaussianState> {
    let m = pre.num_modes() - 2;
    let post = pre
        .condition(Quadrature::p(m), p_tilde)?
        .condition(Quadrature::q(m - 1), q_tilde)?;
    feedforward(params, &post, q_tilde, p_tilde)
}

fn feedforward(
    params: &ProtocolParams,
    post: &GaussianState,
    q_tilde: f64,
    p_tilde: f64,
) -> Result<GaussianState> {
    let (fq, fp) = params.feedforward();
    post.displace(post.num_modes() - 1, -q_tilde * fq, p_tilde * fp)
}

fn measure_and_correct<R: Rng + ?Sized>(
    params: &ProtocolParams,
    pre: &GaussianState,
    rng: &mut R,
) -> Result<TrajectoryRecord> {
    let m = pre.num_modes() - 2;
    let (p_tilde, post) = pre.homodyne(Quadrature::p(m), rng)?;
    let post = post.expect("measurement state keeps at least two modes");
    let (q_tilde, post) = post.homodyne(Quadrature::q(m - 1), rng)?;
    let post = post.expect("B remains after both homodynes");
    Ok(TrajectoryRecord {
        q_tilde,
        p_tilde,
        output: feedforward(params, &post, q_tilde, p_tilde)?,
    })
}

/// One stochastic run of the protocol on `input`. The last mode of `input`
/// is teleported; any preceding modes ride along untouched, which is how
/// entanglement-swap runs are simulated.
pub fn teleport_trajectory<R: Rng + ?Sized>(
    params: &ProtocolParams,
    input: &GaussianState,
    rng: &mut R,
) -> Result<TrajectoryRecord> {
    let pre = measurement_state(params, input)?;
    measure_and_correct(params, &pre, rng)
}

/// The conditional output for given outcomes, without sampling.
pub fn teleport_conditioned(
    params: &ProtocolParams,
    input: &GaussianState,
    q_tilde: f64,
    p_tilde: f64,
) -> Result<GaussianState> {
    correct(params, &measurement_state(params, input)?, q_tilde, p_tilde)
}

/// Output averaged over all measurement outcomes, in closed form.
///
/// The conditional covariance is outcome independent and the conditional
/// mean is affine in the outcome vector `y = (p̃, q̃)`: `μ(y) = μ₀ + M (y − ȳ)`.
/// Since `y ~ N(ȳ, Σ_y)`, the unconditional covariance is
/// `cov_cond + M Σ_y Mᵀ`.
pub fn unconditional_output(
    params: &ProtocolParams,
    input: &GaussianState,
) -> Result<GaussianState> {
    let pre = measurement_state(params, input)?;
    let m = input.num_modes();
    let (ip, iq) = (Quadrature::p(m).index(), Quadrature::q(m - 1).index());
    let (p_bar, q_bar) = (pre.mean()[ip], pre.mean()[iq]);
    let y = [ip, iq];
    let sigma_y = DMatrix::from_fn(2, 2, |i, j| pre.cov()[(y[i], y[j])]);

    let base = correct(params, &pre, q_bar, p_bar)?;
    let dp = correct(params, &pre, q_bar, p_bar + 1.0)?;
    let dq = correct(params, &pre, q_bar + 1.0, p_bar)?;
    let dim = base.mean().len();
    let mut gain = DMatrix::zeros(dim, 2);
    gain.set_column(0, &(dp.mean() - base.mean()));
    gain.set_column(1, &(dq.mean() - base.mean()));
    let cov = base.cov() + &gain * sigma_y * gain.transpose();
    GaussianState::from_moments(base.mean().clone(), (&cov + cov.transpose()) * 0.5)
}

/// Closed-form added noise of the (possibly lossy) protocol:
/// `σ_q² = [κ_Hκ_S/G + (1 − κ_Hκ_S)]/(ηκ_H)` and `σ_p²` with `1 − η` in
/// place of `η`.
pub fn teleport_channel(params: &ProtocolParams) -> AdditiveNoiseSpec {
    let k = params.kappa_h * params.kappa_s;
    let num = k / params.gain + (1.0 - k);
    AdditiveNoiseSpec {
        var_q: num / (params.eta * params.kappa_h),
        var_p: num / ((1.0 - params.eta) * params.kappa_h),
    }
}

/// Coherent-state probes used to identify the channel.
pub const PROBES: [[f64; 2]; 3] = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]];

pub const MIN_MC_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEstimate {
    pub input: [f64; 2],
    pub output_mean: [f64; 2],
    pub std_error: [f64; 2],
}

/// Sampled estimate of the teleportation channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelEstimate {
    pub samples_per_probe: usize,
    /// Slope of the output mean against the input mean, per quadrature.
    pub mean_map_gain: [f64; 2],
    pub gain_std_error: [f64; 2],
    /// Added-noise covariance `(q, p)` in vacuum units.
    pub noise_cov: [[f64; 2]; 2],
    pub noise_cov_std_error: [[f64; 2]; 2],
    pub probes: Vec<ProbeEstimate>,
}

impl ChannelEstimate {
    /// Whether the estimate is within `sigmas` standard errors of a unit-gain
    /// channel adding `spec` (and no q–p correlation).
    pub fn agrees_with(&self, spec: &AdditiveNoiseSpec, sigmas: f64) -> bool {
        let target = [[spec.var_q, 0.0], [0.0, spec.var_p]];
        let noise_ok = (0..2).all(|i| {
            (0..2).all(|j| {
                (self.noise_cov[i][j] - target[i][j]).abs()
                    <= sigmas * self.noise_cov_std_error[i][j]
            })
        });
        let gain_ok = (0..2)
            .all(|i| (self.mean_map_gain[i] - 1.0).abs() <= sigmas * self.gain_std_error[i]);
        let probes_ok = self.probes.iter().all(|p| {
            (0..2).all(|i| (p.output_mean[i] - p.input[i]).abs() <= sigmas * p.std_error[i])
        });
        noise_ok && gain_ok && probes_ok
    }
}

/// Monte Carlo channel estimate: `n_samples` trajectories for each probe in
/// [`PROBES`]. The added noise is the pooled sample covariance of the
/// conditional output means plus the (outcome-independent) conditional
/// covariance minus the vacuum.
pub fn estimate_channel_mc(
    params: &ProtocolParams,
    n_samples: usize,
    seed: u64,
) -> Result<ChannelEstimate> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n_samples,
            min: MIN_MC_SAMPLES,
        });
    }
    let mut probes = Vec::with_capacity(PROBES.len());
    let mut scatter = Matrix2::<f64>::zeros();
    let mut cond_cov = None;
    for (k, probe) in PROBES.iter().enumerate() {
        let pre = measurement_state(params, &GaussianState::coherent(probe[0], probe[1]))?;
        let chunks = par_chunks(n_samples, seed, (k as u64) << 32, |rng, len| {
            let mut outs = Vec::with_capacity(len);
            let mut cov = None;
            for _ in 0..len {
                let rec = measure_and_correct(params, &pre, rng)?;
                let mu = rec.output.mean();
                outs.push([mu[0], mu[1]]);
                cov.get_or_insert_with(|| rec.output.cov().clone());
            }
            Ok::<_, Error>((outs, cov))
        });
        let mut outs = Vec::with_capacity(n_samples);
        for chunk in chunks {
            let (o, c) = chunk?;
            outs.extend(o);
            if cond_cov.is_none() {
                cond_cov = c;
            }
        }
        let n = outs.len() as f64;
        let mean = [0, 1].map(|i| outs.iter().map(|o| o[i]).sum::<f64>() / n);
        let mut s = Matrix2::zeros();
        for o in &outs {
            let d = nalgebra::Vector2::new(o[0] - mean[0], o[1] - mean[1]);
            s += d * d.transpose();
        }
        scatter += s;
        probes.push(ProbeEstimate {
            input: *probe,
            output_mean: mean,
            std_error: [0, 1].map(|i| (s[(i, i)] / (n - 1.0) / n).sqrt()),
        });
    }

    let dof = (PROBES.len() * (n_samples - 1)) as f64;
    let sample_cov = scatter / dof;
    let cond = cond_cov.expect("at least one trajectory ran");
    let mut noise_cov = [[0.0; 2]; 2];
    let mut noise_se = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let vacuum = if i == j { 1.0 } else { 0.0 };
            noise_cov[i][j] = sample_cov[(i, j)] + cond[(i, j)] - vacuum;
            noise_se[i][j] = ((sample_cov[(i, i)] * sample_cov[(j, j)]
                + sample_cov[(i, j)].powi(2))
                / dof)
                .sqrt();
        }
    }

    let gain_for = |axis: usize, probe: usize| {
        let hi = &probes[probe];
        let lo = &probes[0];
        let step = hi.input[axis] - lo.input[axis];
        let g = (hi.output_mean[axis] - lo.output_mean[axis]) / step;
        let se = (hi.std_error[axis].powi(2) + lo.std_error[axis].powi(2)).sqrt() / step;
        (g, se)
    };
    let (gq, sq) = gain_for(0, 1);
    let (gp, sp) = gain_for(1, 2);

    Ok(ChannelEstimate {
        samples_per_probe: n_samples,
        mean_map_gain: [gq, gp],
        gain_std_error: [sq, sp],
        noise_cov,
        noise_cov_std_error: noise_se,
        probes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapResult {
    /// Unconditional joint state of `(I, B′)`.
    pub state: GaussianState,
    /// `var((q_I − q_B′)/√2)`.
    pub var_q_minus: f64,
    /// `var((p_I + p_B′)/√2)`.
    pub var_p_plus: f64,
}

/// Teleports one arm `S` of a balanced two-mode squeezed vacuum `(I, S)`
/// with gain `gain_in`, swapping its entanglement onto `(I, B′)`.
pub fn entanglement_swap(params: &ProtocolParams, gain_in: f64) -> Result<SwapResult> {
    check_gain("gain_in", gain_in)?;
    let tmsv = make_generalized_epr(0.5, gain_in, 1.0)?;
    let state = unconditional_output(params, &tmsv)?;
    let (var_q_minus, var_p_plus) = epr_variances(&state, 0.5)?;
    Ok(SwapResult {
        state,
        var_q_minus,
        var_p_plus,
    })
}
