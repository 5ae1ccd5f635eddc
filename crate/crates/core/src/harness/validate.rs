//! Quick self-checks run by the `validate` subcommand.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::sweep::cell_seed;
use crate::channel::{complex_gaussian, ChannelSet, Geometry, PathLossParams};
use crate::solver::{eval_f1, eval_f2, run_bcd, update_mu, update_rho, Mode, SolverOptions};
use crate::system::{sum_rate, BeamformerState, SystemConfig};
use crate::units::dbm_to_mw;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn random_state(config: &SystemConfig, rng: &mut ChaCha8Rng) -> (ChannelSet, BeamformerState, DVector<C64>) {
    let mut geo = Geometry::default_layout();
    geo.draw_users(config.k, rng);
    let ch = ChannelSet::generate(&geo, &PathLossParams::default(), 1.0, config.m, config.l, rng)
        .expect("default layout is valid");
    let w = DVector::from_fn(config.m * config.k, |_, _| complex_gaussian(rng));
    let w = BeamformerState::from_stacked(config.m, config.k, &(&w * C64::from((config.p_bs / w.norm_squared()).sqrt())));
    let psi = DVector::from_fn(config.l, |_, _| C64::from_polar(rng.random_range(1.0..100.0), rng.random_range(0.0..6.3)));
    (ch, w, psi)
}

fn fp_tightness(seed: u64) -> CheckOutcome {
    let config = SystemConfig { l: 16, ..SystemConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (ch, w, psi) = random_state(&config, &mut rng);
        let rate = sum_rate(&ch, &w, &psi, &config);
        let rho = update_rho(&ch, &w, &psi, &config);
        let mu = update_mu(&ch, &w, &psi, &rho, &config);
        let f1 = eval_f1(&ch, &w, &psi, &rho, &config);
        let f2 = eval_f2(&ch, &w, &psi, &rho, &mu, &config);
        let scale = rate.abs().max(1.0);
        worst = worst.max((f1 - rate).abs() / scale).max((f2 - f1).abs() / scale);
    }
    outcome("surrogate tightness", worst <= 1e-9, format!("worst relative gap {worst:.3e}"))
}

fn amplifier(config: &SystemConfig) -> CheckOutcome {
    let amp = &config.amplifier;
    let pm = amp.p_in_m_dbm();
    let jump = (amp.reflection_gain_db(pm) - amp.reflection_gain_db(pm + 1e-12)).abs();
    let outside = [amp.p_in_min_dbm() - 1e-6, amp.p_in_max_dbm() + 1e-6, f64::NEG_INFINITY]
        .iter()
        .all(|&p| amp.reflection_gain_db(p) == 0.0);
    outcome(
        "amplifier continuity and lock-in",
        jump <= 1e-9 && outside,
        format!("gain jump at linear edge {jump:.3e} dB, reflect-only outside lock-in: {outside}"),
    )
}

fn monotone_bcd(seed: u64) -> CheckOutcome {
    let config = SystemConfig { m: 2, k: 2, l: 8, p_bs: dbm_to_mw(15.0), ..SystemConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..3 {
        let (ch, _, _) = random_state(&config, &mut rng);
        for mode in Mode::ALL {
            match run_bcd(&ch, &config, &SolverOptions::with_mode(mode)) {
                Ok(out) => worst = worst.max(out.trace.max_decrease()),
                Err(_) => failures += 1,
            }
        }
    }
    outcome(
        "alternating optimizer monotone",
        worst <= 1e-6 && failures == 0,
        format!("largest per-iteration decrease {worst:.3e}, failed runs {failures}"),
    )
}

fn seed_independence(exp: &ExperimentConfig) -> CheckOutcome {
    let mut seen = std::collections::HashSet::new();
    let cells = exp.sweep_values.len() * exp.realizations;
    for p in 0..exp.sweep_values.len() {
        for r in 0..exp.realizations {
            seen.insert(cell_seed(exp.seed, p, r));
        }
    }
    outcome(
        "distinct cell seeds",
        seen.len() == cells,
        format!("{} distinct seeds over {cells} cells", seen.len()),
    )
}

/// Runs every check; the experiment supplies the seed, amplifier and grid.
pub fn run_checks(exp: &ExperimentConfig) -> Vec<CheckOutcome> {
    vec![
        fp_tightness(exp.seed),
        amplifier(&exp.system),
        monotone_bcd(exp.seed),
        seed_independence(exp),
    ]
}
