use cvqt_core::capacity::{
    g_star, g_star_adv, gain_threshold, protocol_rate_bounds, pure_loss_capacity, Bound, Target,
    ThresholdQuery,
};
use cvqt_core::gkp::{gkp_error_bound, gkp_error_mc, gkp_spacings};
use cvqt_core::protocol::{
    epr_antisqueezed_variances, epr_variances, estimate_channel_mc, make_generalized_epr,
    teleport_channel,
};
use cvqt_core::{db_to_linear, linear_to_db, Error, ProtocolParams};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Fig4Mode, RunConfig};
use crate::output::{json_f64, Table};
use crate::CliError;

const FIG2A_GAINS_DB: [f64; 2] = [10.0, 20.0];

fn rows<T, F>(items: &[T], f: F) -> Result<Vec<Vec<f64>>, CliError>
where
    T: Sync,
    F: Fn(&T) -> cvqt_core::Result<Vec<f64>> + Sync,
{
    items
        .par_iter()
        .map(|x| f(x).map_err(CliError::from))
        .collect()
}

fn params(cfg: &RunConfig, eta: f64, gain_db: f64) -> cvqt_core::Result<ProtocolParams> {
    ProtocolParams::new(
        eta,
        db_to_linear(gain_db),
        cfg.kappa_h.unwrap_or(1.0),
        cfg.kappa_s.unwrap_or(1.0),
    )
}

/// Rate bounds against η at 10 and 20 dB, with the direct-transduction
/// capacity for comparison.
pub fn fig2a(cfg: &RunConfig) -> Result<Table, CliError> {
    let etas = cfg.eta_range.points();
    let rows = rows(&etas, |&eta| {
        let mut row = vec![eta, pure_loss_capacity(eta)?];
        for db in FIG2A_GAINS_DB {
            let b = protocol_rate_bounds(&params(cfg, eta, db)?)?;
            row.extend([b.lower, b.upper]);
        }
        Ok(row)
    })?;
    Ok(Table {
        columns: vec!["eta", "q_direct", "q_lb_10db", "q_ub_10db", "q_lb_20db", "q_ub_20db"],
        rows,
    })
}

/// Rate bounds against gain at fixed η, plus the two threshold markers.
pub fn fig2b(cfg: &RunConfig) -> Result<(Table, Value), CliError> {
    let eta = cfg.eta.unwrap_or(0.6);
    let gains = cfg.gain_db_range.points();
    let rows = rows(&gains, |&db| {
        let b = protocol_rate_bounds(&params(cfg, eta, db)?)?;
        Ok(vec![db, b.lower, b.upper])
    })?;
    let summary = json!({
        "eta": eta,
        "g_star_db": linear_to_db(g_star(eta)?),
        "g_star_adv_db": linear_to_db(g_star_adv(eta)?),
    });
    Ok((
        Table {
            columns: vec!["g_db", "q_lb", "q_ub"],
            rows,
        },
        summary,
    ))
}

fn threshold_or_nan(eta: f64, target: Target, bound: Bound) -> cvqt_core::Result<f64> {
    match gain_threshold(&ThresholdQuery { eta, target, bound }) {
        Err(Error::NoRoot { .. }) => Ok(f64::NAN),
        other => other,
    }
}

/// Gain thresholds against η. Cells without a root in the search bracket
/// are NaN.
pub fn fig3(cfg: &RunConfig) -> Result<Table, CliError> {
    let etas = cfg.eta_range.points();
    let rows = rows(&etas, |&eta| {
        let mut row = vec![eta];
        for target in [Target::PositiveRate, Target::AdvantageOverDirect] {
            for bound in [Bound::Lower, Bound::Upper] {
                row.push(threshold_or_nan(eta, target, bound)?);
            }
        }
        Ok(row)
    })?;
    Ok(Table {
        columns: vec!["eta", "thr_pos_lb_db", "thr_pos_ub_db", "thr_adv_lb_db", "thr_adv_ub_db"],
        rows,
    })
}

/// Lower bound of the lossy protocol over a two-parameter grid.
pub fn fig4(cfg: &RunConfig) -> Result<Table, CliError> {
    let mode = cfg
        .mode
        .ok_or_else(|| CliError::Config("fig4 needs --mode a or --mode b".into()))?;
    let eta = cfg.eta.unwrap_or(0.5);
    let kappas = cfg.kappa_range.points();
    let lower = |db: f64, kh: f64, ks: f64| -> cvqt_core::Result<f64> {
        let p = ProtocolParams::new(eta, db_to_linear(db), kh, ks)?;
        Ok(protocol_rate_bounds(&p)?.lower)
    };
    match mode {
        Fig4Mode::A => {
            let cells: Vec<(f64, f64)> = cfg
                .gain_db_range
                .points()
                .into_iter()
                .flat_map(|db| kappas.iter().map(move |&k| (db, k)))
                .collect();
            let rows = rows(&cells, |&(db, k)| Ok(vec![db, k, lower(db, k, k)?]))?;
            Ok(Table {
                columns: vec!["g_db", "kappa", "q_lb"],
                rows,
            })
        }
        Fig4Mode::B => {
            let db = cfg.gain_db.unwrap_or(10.0);
            let cells: Vec<(f64, f64)> = kappas
                .iter()
                .flat_map(|&kh| kappas.iter().map(move |&ks| (kh, ks)))
                .collect();
            let rows = rows(&cells, |&(kh, ks)| Ok(vec![kh, ks, lower(db, kh, ks)?]))?;
            Ok(Table {
                columns: vec!["kappa_h", "kappa_s", "q_lb"],
                rows,
            })
        }
    }
}

/// Sampled channel estimate next to the analytic additive noise.
pub fn teleport_demo(cfg: &RunConfig) -> Result<Value, CliError> {
    let p = params(cfg, cfg.eta.unwrap_or(0.6), cfg.gain_db.unwrap_or(10.0))?;
    let samples = cfg.samples.unwrap_or(100_000);
    let analytic = teleport_channel(&p);
    let est = estimate_channel_mc(&p, samples, cfg.seed)?;
    let pass = est.agrees_with(&analytic, 3.0);
    Ok(json!({
        "params": {
            "eta": p.eta(),
            "gain": p.gain(),
            "gain_db": linear_to_db(p.gain()),
            "kappa_h": p.kappa_h(),
            "kappa_s": p.kappa_s(),
        },
        "samples_per_probe": samples,
        "seed": cfg.seed,
        "analytic_channel": { "var_q": analytic.var_q, "var_p": analytic.var_p },
        "mc_estimate": {
            "var_q": est.noise_cov[0][0],
            "var_p": est.noise_cov[1][1],
            "cov_qp": est.noise_cov[0][1],
            "mean_map_gain": est.mean_map_gain,
            "probes": est.probes,
        },
        "std_errors": {
            "var_q": est.noise_cov_std_error[0][0],
            "var_p": est.noise_cov_std_error[1][1],
            "cov_qp": est.noise_cov_std_error[0][1],
            "mean_map_gain": est.gain_std_error,
        },
        "pass": pass,
    }))
}

pub enum GkpOutput {
    Single(Value),
    Sweep(Table),
}

/// GKP logical error: closed-form bound and sampled estimate. With `sweep`,
/// one row per gain; row `i` uses seed `seed + i`.
pub fn gkp(cfg: &RunConfig) -> Result<GkpOutput, CliError> {
    let eta = cfg.eta.unwrap_or(0.5);
    let samples = cfg.samples.unwrap_or(1_000_000);
    let lattice = gkp_spacings(eta)?;
    if cfg.sweep {
        let gains: Vec<(usize, f64)> = cfg.gain_db_range.points().into_iter().enumerate().collect();
        let rows = rows(&gains, |&(i, db)| {
            let g = db_to_linear(db);
            let est = gkp_error_mc(eta, g, samples, cfg.seed.wrapping_add(i as u64))?;
            Ok(vec![db, gkp_error_bound(eta, g)?, est.p_hat, est.std_error])
        })?;
        return Ok(GkpOutput::Sweep(Table {
            columns: vec!["g_db", "p_bound", "p_mc", "std_error"],
            rows,
        }));
    }
    let db = cfg.gain_db.unwrap_or_else(|| linear_to_db(2.0));
    let g = db_to_linear(db);
    let bound = gkp_error_bound(eta, g)?;
    let est = gkp_error_mc(eta, g, samples, cfg.seed)?;
    Ok(GkpOutput::Single(json!({
        "eta": eta,
        "gain": g,
        "gain_db": db,
        "samples": samples,
        "seed": cfg.seed,
        "l_q": lattice.l_q,
        "l_p": lattice.l_p,
        "p_bound": json_f64(bound),
        "p_mc": est.p_hat,
        "std_error": est.std_error,
        "pass": (est.p_hat - bound).abs() <= 3.0 * est.std_error,
    })))
}

/// EPR correlations of the unbalanced resource state.
pub fn epr(cfg: &RunConfig) -> Result<Value, CliError> {
    let eta = cfg.eta.unwrap_or(0.5);
    let db = cfg.gain_db.unwrap_or(10.0);
    let g = db_to_linear(db);
    let ks = cfg.kappa_s.unwrap_or(1.0);
    let state = make_generalized_epr(eta, g, ks)?;
    let (q_minus, p_plus) = epr_variances(&state, eta)?;
    let (q_plus, p_minus) = epr_antisqueezed_variances(&state, eta)?;
    Ok(json!({
        "eta": eta,
        "gain": g,
        "gain_db": db,
        "kappa_s": ks,
        "var_q_minus": q_minus,
        "var_p_plus": p_plus,
        "var_q_plus": q_plus,
        "var_p_minus": p_minus,
        "expected_squeezed": ks / g + 1.0 - ks,
    }))
}
