//! Acceptance suite. Each test prints one `[PASS]` / `[FAIL]` line naming
//! its criterion, then asserts.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use active_ris::amplifier::AmplifierModel;
use active_ris::channel::{complex_gaussian, gen_bs_ris_channel, gen_ris_user_channels, path_loss, ChannelSet, Geometry, PathLossParams};
use active_ris::harness::{run_sweep, ExperimentConfig, SweepVariable};
use active_ris::qcqp::{
    mm_linearize, solve_ball_quadratic, solve_disk_quadratic, AffineLower, ConstraintSet, QcqpOptions, QuadForm,
    QuadUpper, QuadraticObjective, SolveStatus,
};
use active_ris::solver::{eval_f1, eval_f2, run_bcd, update_mu, update_rho, Mode, SolverOptions};
use active_ris::system::{sum_rate, BeamformerState, SystemConfig};
use active_ris::units::dbm_to_mw;
use active_ris::C64;

fn report(id: &str, passed: bool, detail: &str, elapsed: Duration, limit: Duration) -> bool {
    let in_time = elapsed <= limit;
    let ok = passed && in_time;
    println!(
        "[{}] criterion {id}: {detail} ({:.1} s, limit {:.0} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    ok
}

fn draw_channels(config: &SystemConfig, rng: &mut ChaCha8Rng) -> ChannelSet {
    let mut geo = Geometry::default_layout();
    geo.draw_users(config.k, rng);
    ChannelSet::generate(&geo, &PathLossParams::default(), 1.0, config.m, config.l, rng).unwrap()
}

// ---------------------------------------------------------------------------
// 1. Surrogate tightness

#[test]
fn criterion_1_surrogate_tightness() {
    let start = Instant::now();
    let config = SystemConfig { m: 4, k: 4, l: 16, ..SystemConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut gap1, mut gap2): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let ch = draw_channels(&config, &mut rng);
        let w = DVector::from_fn(16, |_, _| complex_gaussian(&mut rng));
        let power = dbm_to_mw(rng.random_range(0.0..25.0));
        let w = BeamformerState::from_stacked(4, 4, &(&w * C64::from((power / w.norm_squared()).sqrt())));
        // Mix of passive-scale and strongly amplifying reflections.
        let amp_max = if i % 2 == 0 { 1.0 } else { 300.0 };
        let psi = DVector::from_fn(16, |_, _| {
            C64::from_polar(rng.random_range(0.0..amp_max), rng.random_range(0.0..std::f64::consts::TAU))
        });
        let rate = sum_rate(&ch, &w, &psi, &config);
        let rho = update_rho(&ch, &w, &psi, &config);
        let mu = update_mu(&ch, &w, &psi, &rho, &config);
        let f1 = eval_f1(&ch, &w, &psi, &rho, &config);
        let f2 = eval_f2(&ch, &w, &psi, &rho, &mu, &config);
        gap1 = gap1.max((f1 - rate).abs());
        gap2 = gap2.max((f2 - f1).abs());
    }
    let ok = report(
        "1 (surrogate tightness)",
        gap1 <= 1e-9 && gap2 <= 1e-9,
        &format!("max |f1 - rate| = {gap1:.2e}, max |f2 - f1| = {gap2:.2e} over 100 states"),
        start.elapsed(),
        Duration::from_secs(10),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// 2. Monotone alternating optimizer

#[test]
fn criterion_2_monotone_convergence() {
    let start = Instant::now();
    let powers = [6.0, 9.0, 12.0, 15.0, 18.0, 21.0];
    let mut worst: f64 = 0.0;
    let mut converged = 0;
    let mut failures = Vec::new();
    let runs = 100;
    for r in 0..runs {
        let config = SystemConfig { m: 4, k: 4, l: 16, p_bs: dbm_to_mw(powers[r % powers.len()]), ..SystemConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + r as u64);
        let ch = draw_channels(&config, &mut rng);
        match run_bcd(&ch, &config, &SolverOptions::with_mode(Mode::PracticalActive)) {
            Ok(out) => {
                worst = worst.max(out.trace.max_decrease());
                if out.converged && out.iterations <= 100 {
                    converged += 1;
                }
            }
            Err(e) => failures.push(format!("run {r}: {e}")),
        }
    }
    let frac = converged as f64 / runs as f64;
    let ok = report(
        "2 (monotone, converging alternating optimizer)",
        worst <= 1e-6 && frac >= 0.95 && failures.is_empty(),
        &format!(
            "largest decrease {worst:.2e}, converged {converged}/{runs}, errors {}",
            failures.len()
        ),
        start.elapsed(),
        Duration::from_secs(15 * 60),
    );
    assert!(ok, "{failures:?}");
}

// ---------------------------------------------------------------------------
// 3. Convex kernels against brute-force grids
//
// Oracle: every instance has a strictly feasible point, so the optimum equals
// the minimum of the Lagrange dual function. The dual is minimized by an
// exhaustive grid over the multipliers followed by a compass refinement; a
// feasible solver point within tolerance of that value is optimal.

/// One concave piece of the Lagrangian: the multiplier scales
/// `x^H quad x`, `Re{lin^H x}` and a constant.
struct DualTerm {
    quad: DMatrix<C64>,
    lin: DVector<C64>,
    constant: f64,
}

struct DualOracle {
    quad: DMatrix<C64>,
    lin: DVector<C64>,
    terms: Vec<DualTerm>,
}

impl DualOracle {
    fn ball(obj: &QuadraticObjective, cons: &ConstraintSet) -> Self {
        let n = obj.dim();
        let zero = DVector::zeros(n);
        let mut terms = vec![];
        if let Some(r2) = cons.ball_radius2 {
            terms.push(DualTerm { quad: DMatrix::identity(n, n), lin: zero.clone(), constant: r2 });
        }
        for c in &cons.quad_upper {
            terms.push(DualTerm { quad: c.form.to_dense(), lin: zero.clone(), constant: c.bound });
        }
        for c in &cons.affine_lower {
            // lambda (2 Re{g^H x} + offset - bound) >= 0 enters with a plus sign.
            terms.push(DualTerm {
                quad: DMatrix::zeros(n, n),
                lin: &c.minorant.g * C64::from(2.0),
                constant: c.minorant.offset - c.bound,
            });
        }
        Self { quad: obj.quad.to_dense(), lin: obj.lin.clone(), terms }
    }

    fn disk(obj: &QuadraticObjective, radii2: &[f64]) -> Self {
        let n = obj.dim();
        let terms = radii2
            .iter()
            .enumerate()
            .map(|(l, r2)| {
                let mut quad = DMatrix::zeros(n, n);
                quad[(l, l)] = C64::new(1.0, 0.0);
                DualTerm { quad, lin: DVector::zeros(n), constant: *r2 }
            })
            .collect();
        Self { quad: obj.quad.to_dense(), lin: obj.lin.clone(), terms }
    }

    /// `max_x Re{c^H x} - x^H M x + const` in closed form; infinite when
    /// `M` is not positive definite.
    fn dual(&self, lambda: &[f64]) -> f64 {
        let mut m = self.quad.clone();
        let mut c = self.lin.clone();
        let mut constant = 0.0;
        for (t, &l) in self.terms.iter().zip(lambda) {
            m += &t.quad * C64::from(l);
            c += &t.lin * C64::from(l);
            constant += l * t.constant;
        }
        match m.cholesky() {
            Some(ch) => 0.25 * c.dotc(&ch.solve(&c)).re + constant,
            None => f64::INFINITY,
        }
    }

    fn minimize(&self) -> f64 {
        let k = self.terms.len();
        let levels: Vec<f64> = std::iter::once(0.0).chain((0..40).map(|i| 10f64.powf(-4.0 + 7.0 * i as f64 / 39.0))).collect();
        let mut best = (f64::INFINITY, vec![0.0; k]);
        let mut idx = vec![0usize; k];
        loop {
            let lambda: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
            let v = self.dual(&lambda);
            if v < best.0 {
                best = (v, lambda);
            }
            let mut d = 0;
            while d < k {
                idx[d] += 1;
                if idx[d] < levels.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == k {
                break;
            }
        }
        // Compass search on the multiplier box, all 3^k neighbours per round.
        let mut step: Vec<f64> = best.1.iter().map(|l| 0.5 * l.max(1e-3)).collect();
        let offsets: Vec<Vec<i32>> = (0..3usize.pow(k as u32))
            .map(|mut c| (0..k).map(|_| { let o = (c % 3) as i32 - 1; c /= 3; o }).collect())
            .collect();
        for _ in 0..20_000 {
            let center = best.1.clone();
            let before = best.0;
            for o in &offsets {
                let lambda: Vec<f64> = (0..k).map(|i| (center[i] + o[i] as f64 * step[i]).max(0.0)).collect();
                let v = self.dual(&lambda);
                if v < best.0 {
                    best = (v, lambda);
                }
            }
            if best.0 >= before {
                step.iter_mut().for_each(|s| *s *= 0.5);
                if step.iter().all(|s| *s < 1e-13) {
                    break;
                }
            }
        }
        best.0
    }
}

fn random_psd(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let rank = rng.random_range(1..=n);
    let b = DMatrix::from_fn(n, rank, |_, _| complex_gaussian(rng) * scale);
    &b * b.adjoint()
}

fn random_vec(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DVector<C64> {
    DVector::from_fn(n, |_, _| complex_gaussian(rng) * scale)
}

fn ball_instance(n: usize, rng: &mut ChaCha8Rng) -> (QuadraticObjective, ConstraintSet) {
    let obj = QuadraticObjective {
        lin: random_vec(n, 2.0, rng),
        quad: QuadForm::Dense(random_psd(n, 0.6, rng)),
    };
    let r2 = rng.random_range(0.5..2.0);
    let g = random_psd(n, 1.0, rng);
    let upper_bound = rng.random_range(0.1..0.6) * r2 * g.trace().re;
    // Lower bound built around a point strictly inside the other constraints.
    let mut xf = random_vec(n, 0.3, rng);
    while xf.norm_squared() >= 0.9 * r2 || QuadForm::Dense(g.clone()).value(&xf) >= 0.9 * upper_bound {
        xf *= C64::from(0.5);
    }
    let anchor = random_vec(n, 0.5, rng);
    let minorant = mm_linearize(&QuadForm::Dense(random_psd(n, 1.0, rng)), &anchor);
    let lower_bound = minorant.value(&xf) - rng.random_range(0.02..0.2);
    let cons = ConstraintSet {
        ball_radius2: Some(r2),
        quad_upper: vec![QuadUpper { form: QuadForm::Dense(g), bound: upper_bound }],
        affine_lower: vec![AffineLower { minorant, bound: lower_bound }],
        disk_radii2: None,
    };
    (obj, cons)
}

fn disk_instance(n: usize, rng: &mut ChaCha8Rng) -> (QuadraticObjective, Vec<f64>) {
    let obj = QuadraticObjective {
        lin: random_vec(n, 2.0, rng),
        quad: QuadForm::Dense(random_psd(n, 0.6, rng)),
    };
    let radii2 = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
    (obj, radii2)
}

#[test]
fn criterion_3_convex_kernels_match_grid_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let opts = QcqpOptions::default();
    let mut worst_ball: f64 = 0.0;
    let mut worst_disk: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    let mut bad_status = 0;
    for i in 0..50 {
        let n = 1 + i % 4;
        let (obj, cons) = ball_instance(n, &mut rng);
        let sol = solve_ball_quadratic(&obj, &cons, &DVector::zeros(n), &opts).unwrap();
        if sol.status != SolveStatus::Converged || cons.max_violation(&sol.x) > 1e-8 {
            bad_status += 1;
        }
        let oracle = DualOracle::ball(&obj, &cons).minimize();
        worst_ball = worst_ball.max((obj.value(&sol.x) - oracle).abs());
        worst_kkt = worst_kkt.max(sol.kkt_residual);
    }
    for i in 0..50 {
        let n = 1 + i % 3;
        let (obj, radii2) = disk_instance(n, &mut rng);
        let x0 = random_vec(n, 1.0, &mut rng);
        let sol = solve_disk_quadratic(&obj, &radii2, &x0, &opts).unwrap();
        let inside = sol.x.iter().zip(&radii2).all(|(z, r2)| z.norm_sqr() <= r2 * (1.0 + 1e-12));
        if sol.status != SolveStatus::Converged || !inside {
            bad_status += 1;
        }
        let oracle = DualOracle::disk(&obj, &radii2).minimize();
        worst_disk = worst_disk.max((obj.value(&sol.x) - oracle).abs());
        worst_kkt = worst_kkt.max(sol.kkt_residual);
    }
    let ok = report(
        "3 (convex kernels vs grid oracles)",
        worst_ball <= 1e-3 && worst_disk <= 1e-3 && worst_kkt < 1e-5 && bad_status == 0,
        &format!(
            "max objective gap ball {worst_ball:.2e}, disk {worst_disk:.2e}; max KKT residual {worst_kkt:.2e}; \
             non-converged or infeasible {bad_status}/100"
        ),
        start.elapsed(),
        Duration::from_secs(5 * 60),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// 4. Scalar instances against an exhaustive grid

/// Best practical-design rate over a 2-D grid of (transmit power, reflection
/// power gain). The power axis is log-spaced over its feasible range; the
/// gain axis is the fraction `t in (0, 1]` of the largest gain feasible at
/// that power, so the boundary `t = 1` is always on the grid.
fn scalar_grid_rate(ch: &ChannelSet, config: &SystemConfig) -> f64 {
    let amp = &config.amplifier;
    let h2 = ch.h_bs_ris[(0, 0)].norm_sqr();
    let rate = |u: f64, t: f64| -> Option<f64> {
        let pw = u.exp().min(config.p_bs);
        let p_in = h2 * pw;
        if p_in < amp.p_in_min_mw() || p_in > amp.p_in_m_mw() || !(0.0..=1.0).contains(&t) {
            return None;
        }
        let a = t * amp.amplification_factor(p_in).min(config.p_elem / (p_in + config.sigma_v2));
        let w = BeamformerState::from_stacked(1, 1, &DVector::from_element(1, C64::new(pw.sqrt(), 0.0)));
        let psi = DVector::from_element(1, C64::new(a.sqrt(), 0.0));
        Some(sum_rate(ch, &w, &psi, config))
    };
    let (u_lo, u_hi) = ((amp.p_in_min_mw() / h2).ln(), config.p_bs.ln());
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let (nu, nt) = (2001, 201);
    for i in 0..nu {
        for j in 0..nt {
            let u = u_lo + (u_hi - u_lo) * i as f64 / (nu - 1) as f64;
            let t = j as f64 / (nt - 1) as f64;
            if let Some(r) = rate(u, t) {
                if r > best.0 {
                    best = (r, u, t);
                }
            }
        }
    }
    // Local refinement on the same parametrization.
    let mut half = ((u_hi - u_lo) / (nu - 1) as f64, 1.0 / (nt - 1) as f64);
    while half.0.max(half.1) > 1e-12 {
        let before = best.0;
        let center = (best.1, best.2);
        for i in -4..=4 {
            for j in -4..=4 {
                let (u, t) = (center.0 + half.0 * i as f64 / 4.0, center.1 + half.1 * j as f64 / 4.0);
                if let Some(r) = rate(u, t) {
                    if r > best.0 {
                        best = (r, u, t);
                    }
                }
            }
        }
        if best.0 <= before {
            half = (half.0 / 2.0, half.1 / 2.0);
        }
    }
    best.0
}

#[test]
fn criterion_4_scalar_instances_match_grid() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut config = SystemConfig { m: 1, k: 1, l: 1, ..SystemConfig::default() };
        config.p_elem = dbm_to_mw(rng.random_range(-70.0..0.1));
        let ch = draw_channels(&config, &mut rng);
        // Full-power incident power between 3 and 40 dB above the lock-in edge.
        let target = dbm_to_mw(config.amplifier.p_in_min_dbm() + rng.random_range(3.0..40.0));
        config.p_bs = target / ch.h_bs_ris[(0, 0)].norm_sqr();
        let out = run_bcd(&ch, &config, &SolverOptions::with_mode(Mode::PracticalActive)).unwrap();
        let oracle = scalar_grid_rate(&ch, &config);
        worst = worst.max((out.sum_rate - oracle).abs() / oracle);
    }
    let ok = report(
        "4 (scalar instances vs exhaustive grid)",
        worst <= 0.02,
        &format!("largest relative gap {worst:.2e} over 20 instances"),
        start.elapsed(),
        Duration::from_secs(2 * 60),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// 5. Amplifier law

#[test]
fn criterion_5_amplifier_law() {
    let start = Instant::now();
    let amp = AmplifierModel::default();
    let pm = amp.p_in_m_dbm();
    let eps = 1e-12;
    let jump = (amp.reflection_gain_db(pm) - amp.reflection_gain_db(pm + eps))
        .abs()
        .max((amp.reflection_gain_db(pm - eps) - amp.reflection_gain_db(pm)).abs());
    let mut outside_ok = true;
    for i in 0..1000 {
        let below = amp.p_in_min_dbm() - 1e-9 - i as f64 * 0.2;
        let above = amp.p_in_max_dbm() + 1e-9 + i as f64 * 0.2;
        outside_ok &= amp.reflection_gain_db(below) == 0.0 && amp.reflection_gain_db(above) == 0.0;
    }
    outside_ok &= amp.amplification_factor(0.0) == 1.0;
    let g0 = amp.reflection_gain_db(0.0);
    let g10 = amp.reflection_gain_db(10.0);
    let fit_ok = (g0 - 22.46).abs() <= 1e-12 && (g10 - 20.51).abs() <= 1e-12;
    let ok = report(
        "5 (amplifier law)",
        jump <= 1e-9 && outside_ok && fit_ok,
        &format!(
            "gain jump at linear edge {jump:.2e} dB; 0 dB outside lock-in: {outside_ok}; \
             gain at 0 / 10 dBm = {g0:.12} / {g10:.12} dB"
        ),
        start.elapsed(),
        Duration::from_secs(1),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// 6. Sum-rate versus transmit budget

#[test]
fn criterion_6_power_sweep_shape() {
    let start = Instant::now();
    let mut exp = ExperimentConfig::default();
    exp.sweep_variable = SweepVariable::PBsDbm;
    exp.sweep_values = vec![6.0, 9.0, 12.0, 15.0, 18.0, 21.0];
    exp.realizations = 50;
    exp.system.l = 64;
    exp.seed = 6;
    let res = run_sweep(&exp).unwrap();
    let practical = res.means(Mode::PracticalActive);
    let ideal = res.means(Mode::IdealActive);
    let passive = res.means(Mode::Passive);
    let failed: usize = res.summaries.iter().map(|s| s.n_failed).sum();
    let mut lines = Vec::new();
    let (mut a, mut b) = (true, true);
    for (i, p) in exp.sweep_values.iter().enumerate() {
        lines.push(format!("{p} dBm: {:.4}/{:.4}/{:.4}", practical[i], ideal[i], passive[i]));
        if *p <= 9.0 {
            a &= practical[i] >= ideal[i];
        }
        if *p >= 18.0 {
            b &= (practical[i] - ideal[i]).abs() <= 0.05 * ideal[i].max(practical[i]);
        }
    }
    let c = passive.iter().all(|r| *r < 0.5);
    let ok = report(
        "6 (sum-rate vs transmit budget)",
        a && b && c && failed == 0,
        &format!(
            "(a) {a} (b) {b} (c) {c}; failed runs {failed}; practical/ideal/passive means: {}",
            lines.join(", ")
        ),
        start.elapsed(),
        Duration::from_secs(2 * 3600),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// 7. Sum-rate versus user position

#[test]
fn criterion_7_position_sweep_ordering() {
    let start = Instant::now();
    let mut all_ok = true;
    let mut details = Vec::new();
    for l in [64, 16] {
        let mut exp = ExperimentConfig::default();
        exp.sweep_variable = SweepVariable::UserCenterXM;
        exp.sweep_values = vec![350.0, 375.0, 400.0, 425.0, 450.0];
        exp.realizations = 50;
        exp.system.l = l;
        exp.modes = vec![Mode::PracticalActive, Mode::IdealActive];
        exp.seed = 7;
        let res = run_sweep(&exp).unwrap();
        let practical = res.means(Mode::PracticalActive);
        let ideal = res.means(Mode::IdealActive);
        let ordered = practical.iter().zip(&ideal).all(|(p, i)| p >= i);
        let failed: usize = res.summaries.iter().map(|s| s.n_failed).sum();
        all_ok &= ordered && failed == 0;
        let ratio = practical[2] / ideal[2];
        let means: Vec<String> = exp
            .sweep_values
            .iter()
            .enumerate()
            .map(|(i, x)| format!("{x} m: {:.4}/{:.4}", practical[i], ideal[i]))
            .collect();
        details.push(format!(
            "L={l}: ordered {ordered}, failed {failed}, practical/ideal at 400 m = {ratio:.3} ({})",
            means.join(", ")
        ));
    }
    let ok = report(
        "7 (sum-rate vs user position)",
        all_ok,
        &details.join("; "),
        start.elapsed(),
        Duration::from_secs(2 * 3600),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// 8. Channel statistics

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn criterion_8_channel_calibration() {
    let start = Instant::now();
    let n = 100_000;
    let pl = PathLossParams::default();
    let mut geo = Geometry::default_layout();
    geo.user_positions = vec![[404.0, 3.0]];
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut bs_ris = Vec::with_capacity(n);
    let mut ris_user = Vec::with_capacity(n);
    let mut finite = true;
    for _ in 0..n {
        let h = gen_bs_ris_channel(&geo, &pl, 1.0, 2, 2, &mut rng).unwrap();
        let g = gen_ris_user_channels(&geo, &pl, 1, 2, &mut rng).unwrap();
        finite &= h.iter().chain(g[0].iter()).all(|z| z.re.is_finite() && z.im.is_finite());
        bs_ris.push(h[(1, 1)].norm_sqr());
        ris_user.push(g[0][1].norm_sqr());
    }
    let pl_h = path_loss(geo.bs_ris_distance(), pl.alpha_bs_ris, pl.c0_db).unwrap();
    let pl_g = path_loss(geo.ris_user_distances()[0], pl.alpha_ris_user, pl.c0_db).unwrap();
    let (mh, sh) = mean_and_stderr(&bs_ris);
    let (mg, sg) = mean_and_stderr(&ris_user);
    let zh = (mh - pl_h) / sh;
    let zg = (mg - pl_g) / sg;
    let ok = report(
        "8 (channel calibration)",
        finite && zh.abs() <= 3.0 && zg.abs() <= 3.0,
        &format!("BS-RIS mean/path loss z = {zh:+.2}, RIS-user z = {zg:+.2} over {n} draws"),
        start.elapsed(),
        Duration::from_secs(60),
    );
    assert!(ok);
}
