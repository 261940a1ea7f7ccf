//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cvqt_core::capacity::{
    self, gain_threshold, g_star, g_star_adv, protocol_rate_bounds, q_lb, q_ub, Bound, Target,
    ThresholdQuery,
};
use cvqt_core::gkp::{gkp_error_bound, gkp_error_mc};
use cvqt_core::phase_space::{symplectic_form, Axis, GaussianState, SymplecticOp};
use cvqt_core::protocol::{
    entanglement_swap, estimate_channel_mc, teleport_channel, unconditional_output,
};
use cvqt_core::{db_to_linear, linear_to_db, ProtocolParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{max_abs_diff, random_single_mode};

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Outcome {
            ok,
            detail: detail.into(),
        }
    }
}

fn run(id: u32, name: &str, budget: Duration, f: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let ok = out.ok && in_time;
    let timing = if in_time {
        format!("{:.3}s", elapsed.as_secs_f64())
    } else {
        format!("{:.3}s > budget {:.0}s", elapsed.as_secs_f64(), budget.as_secs_f64())
    };
    println!(
        "{} {id} {name}: {} [{timing}]",
        if ok { "PASS" } else { "FAIL" },
        out.detail
    );
    ok
}

fn threshold(eta: f64, target: Target, bound: Bound) -> cvqt_core::Result<f64> {
    gain_threshold(&ThresholdQuery { eta, target, bound })
}

fn threshold_range() -> Outcome {
    let lower = threshold(0.5, Target::PositiveRate, Bound::Lower);
    let upper = threshold(0.5, Target::PositiveRate, Bound::Upper);
    let lower_ok = matches!(lower, Ok(db) if (db - 4.343).abs() <= 0.005);
    let upper_ok = matches!(upper, Ok(db) if (db - 1.195).abs() <= 0.005);
    let upper_txt = match &upper {
        Ok(db) => format!("{db:.6} dB"),
        Err(e) => {
            let (db, bits) = capacity::upper_bound_stationary_gain_db(0.5)
                .expect("stationary point at eta = 0.5");
            format!("{e}; q_ub minimum {bits:.6} bits at {db:.6} dB")
        }
    };
    Outcome::new(
        lower_ok && upper_ok,
        format!(
            "lower {} (want 4.343 +- 0.005), upper {upper_txt} (want 1.195 +- 0.005)",
            match &lower {
                Ok(db) => format!("{db:.6} dB"),
                Err(e) => e.to_string(),
            }
        ),
    )
}

fn closed_form_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 1..=9 {
        let eta = i as f64 / 10.0;
        let pos = threshold(eta, Target::PositiveRate, Bound::Lower)
            .map(|db| (db - linear_to_db(g_star(eta).unwrap())).abs());
        let adv = threshold(eta, Target::AdvantageOverDirect, Bound::Lower).and_then(|db| {
            g_star_adv(eta).map(|g| (db - linear_to_db(g)).abs())
        });
        match (pos, adv) {
            (Ok(a), Ok(b)) => worst = worst.max(a).max(b),
            (Err(e), _) | (_, Err(e)) => {
                return Outcome::new(false, format!("eta = {eta}: {e}"));
            }
        }
    }
    Outcome::new(
        worst <= 1e-6,
        format!("max |root - closed form| = {worst:.3e} dB (tol 1e-6)"),
    )
}

fn ideal_channel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e1e);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let eta = rng.random_range(0.05..0.95);
        let gain = 10f64.powf(rng.random_range(0.0..3.0));
        let params = ProtocolParams::ideal(eta, gain).unwrap();
        let input = random_single_mode(&mut rng);
        let out = unconditional_output(&params, &input).unwrap();
        let expected = input.additive_noise(0, 1.0 / (eta * gain), 1.0 / ((1.0 - eta) * gain));
        let expected = expected.unwrap();
        worst = worst
            .max(max_abs_diff(out.cov(), expected.cov()))
            .max((out.mean() - expected.mean()).amax());
    }
    let params = ProtocolParams::ideal(0.6, 10.0).unwrap();
    let est = estimate_channel_mc(&params, 100_000, 2024).unwrap();
    let mc_ok = est.agrees_with(&teleport_channel(&params), 3.0);
    Outcome::new(
        worst <= 1e-10 && mc_ok,
        format!(
            "analytic max dev {worst:.3e} (tol 1e-10); MC noise ({:.5}, {:.5}) vs (1/6, 1/4) {}",
            est.noise_cov[0][0],
            est.noise_cov[1][1],
            if mc_ok { "within 3 SE" } else { "outside 3 SE" }
        ),
    )
}

fn lossy_channel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e2e);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let eta = rng.random_range(0.05..0.95);
        let gain = 10f64.powf(rng.random_range(0.0..3.0));
        let kh = rng.random_range(0.5..=1.0);
        let ks = rng.random_range(0.5..=1.0);
        let params = ProtocolParams::new(eta, gain, kh, ks).unwrap();
        let input = random_single_mode(&mut rng);
        let out = unconditional_output(&params, &input).unwrap();
        let g = kh * ks / gain + 1.0 - kh * ks;
        let vq = g / (eta * kh);
        let vp = g / ((1.0 - eta) * kh);
        let expected = input.additive_noise(0, vq, vp).unwrap();
        worst = worst
            .max(max_abs_diff(out.cov(), expected.cov()))
            .max((out.mean() - expected.mean()).amax());
    }
    let mut reduce: f64 = 0.0;
    for _ in 0..1000 {
        let eta = rng.random_range(0.01..0.99);
        let gain = 10f64.powf(rng.random_range(0.0..6.0));
        let ch = teleport_channel(&ProtocolParams::new(eta, gain, 1.0, 1.0).unwrap());
        let q = 1.0 / (eta * gain);
        let p = 1.0 / ((1.0 - eta) * gain);
        reduce = reduce
            .max(((ch.var_q - q) / q).abs())
            .max(((ch.var_p - p) / p).abs());
    }
    Outcome::new(
        worst <= 1e-10 && reduce <= 4.0 * f64::EPSILON,
        format!(
            "lossy max dev {worst:.3e} (tol 1e-10); kappa = 1 max rel dev {reduce:.3e}"
        ),
    )
}

fn slope_law() -> Outcome {
    let eta: f64 = 0.6;
    let lower = |gain: f64| {
        protocol_rate_bounds(&ProtocolParams::ideal(eta, gain).unwrap())
            .unwrap()
            .lower
    };
    let threshold = g_star(eta).unwrap();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..=250 {
        let g1 = db_to_linear(i as f64 * 0.1);
        let g2 = g1 * 2.0;
        if g1 <= threshold * (1.0 + 1e-12) {
            continue;
        }
        let step = lower(g2) - lower(g1);
        worst = worst.max((step - 1.0).abs());
        count += 1;
    }
    Outcome::new(
        count > 0 && worst <= 1e-9,
        format!("{count} gain doublings, max |dQ - 1 bit| = {worst:.3e} (tol 1e-9)"),
    )
}

fn lossy_region() -> Outcome {
    let eta = 0.5;
    let gain = db_to_linear(10.0);
    let rate = |kh: f64, ks: f64| {
        protocol_rate_bounds(&ProtocolParams::new(eta, gain, kh, ks).unwrap())
            .unwrap()
            .lower
    };
    let point = rate(1.0, 0.71);
    let point_ok = (point - 0.0280).abs() <= 0.0005 && point > 0.0;

    let grid: Vec<f64> = (0..=100).map(|i| 0.5 + i as f64 * 0.005).collect();
    let positive: Vec<Vec<bool>> = grid
        .iter()
        .map(|&kh| grid.iter().map(|&ks| rate(kh, ks) > 0.0).collect())
        .collect();
    let n = grid.len();
    let monotone = (0..n).all(|i| {
        (0..n).all(|j| {
            !positive[i][j]
                || ((i + 1 == n || positive[i + 1][j]) && (j + 1 == n || positive[i][j + 1]))
        })
    });

    let corner = rate(0.95, 0.71);
    let corner_ok = corner <= 0.0;
    Outcome::new(
        point_ok && monotone && corner_ok,
        format!(
            "q_lb(1, 0.71) = {point:.6} (want 0.0280 +- 0.0005, > 0); boundary monotone: {monotone}; \
             corner (0.95, 0.71) not positive: {corner_ok}"
        ),
    )
}

fn gkp_checks() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    let mut seed = 7000;
    for &eta in &[0.3, 0.5, 0.7] {
        for &gain in &[1.5, 2.0, 4.0] {
            let bound = gkp_error_bound(eta, gain).unwrap();
            let est = gkp_error_mc(eta, gain, 1_000_000, seed).unwrap();
            seed += 1;
            let z = (est.p_hat - bound).abs() / est.std_error;
            if z > 3.0 {
                ok = false;
                details.push(format!("({eta}, {gain}) z = {z:.2}"));
            }
        }
    }
    let mut worst_ratio: f64 = 1.0;
    for &eta in &[0.3, 0.5, 0.7] {
        for &gain in &[20.0, 40.0] {
            let pe = gkp_error_bound(eta, gain).unwrap();
            let r = -pe.ln() / (gain * std::f64::consts::PI * (eta * (1.0 - eta)).sqrt());
            if !(0.9..=1.1).contains(&r) {
                ok = false;
                details.push(format!("asymptote ({eta}, {gain}) ratio {r:.4}"));
            }
            if (r - 1.0).abs() > (worst_ratio - 1.0).abs() {
                worst_ratio = r;
            }
        }
    }
    let summary = format!("9 MC points within 3 SE; asymptote ratio worst {worst_ratio:.4}");
    Outcome::new(
        ok,
        if details.is_empty() {
            summary
        } else {
            details.join("; ")
        },
    )
}

fn property_suites() -> Outcome {
    const CASES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x8888);
    let mut failures = Vec::new();
    let omega4 = symplectic_form(2);

    let mut closure: f64 = 0.0;
    for _ in 0..CASES {
        let eta = rng.random_range(0.0..1.0);
        let s = SymplecticOp::beamsplitter(eta, 0, 1, 2).unwrap();
        let m = s.matrix();
        closure = closure.max((m * &omega4 * m.transpose() - &omega4).amax());
    }
    if closure >= 1e-12 {
        failures.push(format!("symplectic closure {closure:.3e}"));
    }

    let mut min_eig = f64::INFINITY;
    for _ in 0..CASES {
        let n = rng.random_range(1..=3usize);
        let mut state = GaussianState::vacuum(n).unwrap();
        for _ in 0..rng.random_range(1..=12) {
            let m = rng.random_range(0..n);
            state = match rng.random_range(0..5) {
                0 if n > 1 => {
                    let other = (m + rng.random_range(1..n)) % n;
                    let op = SymplecticOp::beamsplitter(rng.random_range(0.0..=1.0), m, other, n);
                    state.apply(&op.unwrap()).unwrap()
                }
                1 => {
                    let axis = if rng.random_bool(0.5) {
                        Axis::Position
                    } else {
                        Axis::Momentum
                    };
                    let gain = 10f64.powf(rng.random_range(0.0..2.0));
                    let op = SymplecticOp::squeezer(gain, axis, m, n).unwrap();
                    state.apply(&op).unwrap()
                }
                2 => state.loss(m, rng.random_range(0.0..=1.0)).unwrap(),
                3 => state
                    .additive_noise(m, rng.random_range(0.0..2.0), rng.random_range(0.0..2.0))
                    .unwrap(),
                _ => state
                    .displace(m, rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))
                    .unwrap(),
            };
        }
        min_eig = min_eig.min(state.min_symplectic_eigenvalue());
    }
    if min_eig < 1.0 - 1e-9 {
        failures.push(format!("physicality min eigenvalue {min_eig}"));
    }

    let mut composition: f64 = 0.0;
    for _ in 0..CASES {
        let state = random_single_mode(&mut rng);
        let k1 = rng.random_range(0.0..=1.0);
        let k2 = rng.random_range(0.0..=1.0);
        let two = state.loss(0, k1).unwrap().loss(0, k2).unwrap();
        let one = state.loss(0, k1 * k2).unwrap();
        composition = composition
            .max(max_abs_diff(two.cov(), one.cov()))
            .max((two.mean() - one.mean()).amax());
    }
    if composition > 1e-12 {
        failures.push(format!("loss composition {composition:.3e}"));
    }

    let mut symmetry: f64 = 0.0;
    for _ in 0..CASES {
        let eta = rng.random_range(0.01..0.99);
        let gain = 10f64.powf(rng.random_range(0.0..3.0));
        let a = protocol_rate_bounds(&ProtocolParams::ideal(eta, gain).unwrap()).unwrap();
        let b = protocol_rate_bounds(&ProtocolParams::ideal(1.0 - eta, gain).unwrap()).unwrap();
        symmetry = symmetry
            .max((a.lower - b.lower).abs())
            .max((a.upper - b.upper).abs());
    }
    if symmetry > 1e-12 {
        failures.push(format!("eta symmetry {symmetry:.3e}"));
    }

    let (mut lower_bad, mut upper_bad) = (0, 0);
    let mut upper_bad_max_db = f64::NEG_INFINITY;
    for _ in 0..CASES {
        let gain = 10f64.powf(rng.random_range(0.0..3.0));
        let at_half = protocol_rate_bounds(&ProtocolParams::ideal(0.5, gain).unwrap()).unwrap();
        let eta = rng.random_range(0.001..0.999);
        let other = protocol_rate_bounds(&ProtocolParams::ideal(eta, gain).unwrap()).unwrap();
        if other.lower > at_half.lower + 1e-12 {
            lower_bad += 1;
        }
        if other.upper > at_half.upper + 1e-12 {
            upper_bad += 1;
            upper_bad_max_db = upper_bad_max_db.max(linear_to_db(gain));
        }
    }
    if lower_bad + upper_bad > 0 {
        failures.push(format!(
            "maximum at eta = 1/2: q_lb violated in {lower_bad} cases, q_ub violated in \
             {upper_bad} cases (all at G <= {upper_bad_max_db:.3} dB, where q_ub grows with v)"
        ));
    }

    let mut ordering_ok = true;
    for _ in 0..CASES {
        let v = 10f64.powf(rng.random_range(-4.0..2.0));
        if q_lb(v).unwrap() > q_ub(v).unwrap() {
            ordering_ok = false;
        }
    }
    if !ordering_ok {
        failures.push("q_lb <= q_ub".into());
    }

    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "6 suites x {CASES} cases; closure {closure:.1e}, min eig {min_eig:.12}, \
                 composition {composition:.1e}, symmetry {symmetry:.1e}"
            )
        } else {
            failures.join("; ")
        },
    )
}

fn swap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a5a);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let eta = rng.random_range(0.05..0.95);
        let gain = 10f64.powf(rng.random_range(0.0..3.0));
        let gain_in = 10f64.powf(rng.random_range(0.0..2.0));
        let res = entanglement_swap(&ProtocolParams::ideal(eta, gain).unwrap(), gain_in).unwrap();
        let q = 1.0 / gain_in + 1.0 / (2.0 * eta * gain);
        let p = 1.0 / gain_in + 1.0 / (2.0 * (1.0 - eta) * gain);
        worst = worst
            .max((res.var_q_minus - q).abs())
            .max((res.var_p_plus - p).abs());
    }
    Outcome::new(
        worst <= 1e-10,
        format!("10 sets, max dev {worst:.3e} (tol 1e-10)"),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        run(1, "threshold range at eta = 0.5", secs(1), threshold_range),
        run(2, "closed-form threshold agreement", secs(1), closed_form_agreement),
        run(3, "ideal channel (analytic + MC)", secs(30), ideal_channel),
        run(4, "lossy channel", secs(5), lossy_channel),
        run(5, "slope law at eta = 0.6", secs(1), slope_law),
        run(6, "lossy positive-rate region", secs(5), lossy_region),
        run(7, "GKP bound vs oracle", secs(60), gkp_checks),
        run(8, "property suites", secs(60), property_suites),
        run(9, "entanglement swap", secs(5), swap),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
