//! Alternating optimization of transmit beams and RIS reflection.
//!
//! Each outer iteration refreshes the auxiliaries (`rho`, `mu`), solves the
//! beam subproblem, re-evaluates the amplifier gains from the new incident
//! powers and then solves the reflection subproblem with disk radii capped by
//! those gains. Three modes share the loop:
//!
//! - [`Mode::PracticalActive`]: incident powers kept inside the linear interval,
//!   reflection gain capped by the hardware law. By default a second run
//!   starts from the clipped ideal design and the better result is kept.
//! - [`Mode::IdealActive`]: constant gain cap, no interval; the final design is
//!   then evaluated with the gains the hardware would actually deliver.
//! - [`Mode::Passive`]: unit-modulus reflection, no amplifier.

pub mod fp;
pub mod init;
pub mod subproblem;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use fp::{eval_f1, eval_f2, update_mu, update_rho};
pub use init::InitStrategy;
pub use subproblem::{
    assemble_psi_subproblem, assemble_w_subproblem, assemble_w_subproblem_with, incident_form, IncidentBounds,
};

use crate::amplifier::{AmplifierRegion, GainWindow};
use crate::channel::ChannelSet;
use crate::qcqp::{
    solve_ball_quadratic, solve_disk_quadratic, solve_unit_modulus_quadratic, QcqpOptions, QuadraticObjective,
    SolveStatus,
};
use crate::system::{
    check_constraints, incident_power, sum_rate, BeamformerState, ConstraintKind, ConstraintReport, ReflectionState,
    SystemConfig,
};
use crate::units::db_to_linear;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PracticalActive,
    IdealActive,
    Passive,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::PracticalActive, Mode::IdealActive, Mode::Passive];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::PracticalActive => "practical_active",
            Mode::IdealActive => "ideal_active",
            Mode::Passive => "passive",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}` (expected practical_active, ideal_active or passive)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub mode: Mode,
    /// Stop once the relative sum-rate change drops below this.
    pub outer_tol: f64,
    pub max_outer_iters: usize,
    pub beam_qcqp: QcqpOptions,
    pub reflection_qcqp: QcqpOptions,
    pub init_strategy: InitStrategy,
    /// Constant gain assumed by the ideal design, dB. `None` uses the peak
    /// gain of the amplifier's linear interval.
    pub ideal_gain_db: Option<f64>,
    /// Evaluate the ideal design with the gains the hardware would deliver.
    pub reevaluate_ideal: bool,
    /// Practical mode also ascends from the hardware-clipped ideal design and
    /// keeps the better of the two runs.
    pub ideal_warm_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mode: Mode::PracticalActive,
            outer_tol: 1e-4,
            max_outer_iters: 100,
            beam_qcqp: QcqpOptions::default(),
            reflection_qcqp: QcqpOptions {
                tol: 1e-7,
                feas_tol: 1e-6,
                max_iter: 500,
            },
            init_strategy: InitStrategy::MrtScaled,
            ideal_gain_db: None,
            reevaluate_ideal: true,
            ideal_warm_start: true,
        }
    }
}

impl SolverOptions {
    pub fn with_mode(mode: Mode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tol > 0.0 && self.outer_tol.is_finite()) {
            return Err(Error::Config(format!("outer_tol must be positive, got {}", self.outer_tol)));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::Config("max_outer_iters must be at least 1".into()));
        }
        for q in [&self.beam_qcqp, &self.reflection_qcqp] {
            if !(q.tol > 0.0 && q.feas_tol > 0.0 && q.tol.is_finite() && q.feas_tol.is_finite()) || q.max_iter == 0 {
                return Err(Error::Config("QCQP tolerances must be positive and max_iter at least 1".into()));
            }
        }
        if self.ideal_gain_db.is_some_and(|g| !g.is_finite()) {
            return Err(Error::Config("ideal_gain_db must be finite".into()));
        }
        Ok(())
    }
}

/// State after one outer iteration (iteration 0 is the starting point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub sum_rate: f64,
    pub bs_power_slack: f64,
    pub min_output_power_slack: f64,
    pub incident_power_mw: Vec<f64>,
    pub regions: Vec<AmplifierRegion>,
    /// The beam step was re-solved with incident powers held inside the
    /// window where the hardware still delivers the current reflection gain.
    pub hardware_capped: bool,
    pub beam_status: Option<SolveStatus>,
    pub reflection_status: Option<SolveStatus>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn sum_rates(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.sum_rate).collect()
    }

    /// Largest drop in sum-rate between consecutive records (0 if none).
    pub fn max_decrease(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[0].sum_rate - w[1].sum_rate)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdOutcome {
    pub mode: Mode,
    pub w: BeamformerState,
    /// Deployed reflection; for the ideal mode with re-evaluation this is the
    /// design clipped to the realized hardware gain.
    pub reflection: ReflectionState,
    /// Reflection the optimizer designed.
    pub design_reflection: ReflectionState,
    pub trace: IterationTrace,
    /// Sum-rate of the deployed state.
    pub sum_rate: f64,
    /// Sum-rate under the model the optimizer used.
    pub design_sum_rate: f64,
    pub converged: bool,
    pub iterations: usize,
    pub hardware_capped_steps: usize,
    pub constraints: ConstraintReport,
}

impl BcdOutcome {
    /// Every incident power lies in the linear interval.
    pub fn interval_feasible(&self) -> bool {
        self.constraints.count(ConstraintKind::IncidentLower) == 0
            && self.constraints.count(ConstraintKind::IncidentUpper) == 0
    }

    /// Share of elements in each amplifier region at the deployed state:
    /// `[linear, saturated, reflect_only]`.
    pub fn region_fractions(&self) -> [f64; 3] {
        let last = self.trace.records.last().expect("trace holds the starting point");
        let n = last.regions.len().max(1) as f64;
        let count = |r: AmplifierRegion| last.regions.iter().filter(|x| **x == r).count() as f64 / n;
        [
            count(AmplifierRegion::Linear),
            count(AmplifierRegion::Saturated),
            count(AmplifierRegion::ReflectOnly),
        ]
    }
}

/// Runs the design selected by `options.mode`.
pub fn run_bcd(channels: &ChannelSet, config: &SystemConfig, options: &SolverOptions) -> Result<BcdOutcome> {
    config.validate()?;
    config.check_channels(channels)?;
    options.validate()?;
    Engine::new(channels, config, options).run()
}

pub fn run_passive_mode(channels: &ChannelSet, config: &SystemConfig, options: &SolverOptions) -> Result<BcdOutcome> {
    run_bcd(channels, config, &SolverOptions { mode: Mode::Passive, ..*options })
}

pub fn run_ideal_mode(channels: &ChannelSet, config: &SystemConfig, options: &SolverOptions) -> Result<BcdOutcome> {
    run_bcd(channels, config, &SolverOptions { mode: Mode::IdealActive, ..*options })
}

pub fn run_practical_mode(channels: &ChannelSet, config: &SystemConfig, options: &SolverOptions) -> Result<BcdOutcome> {
    run_bcd(channels, config, &SolverOptions { mode: Mode::PracticalActive, ..*options })
}

#[derive(Debug, Clone)]
struct Iterate {
    w: BeamformerState,
    psi: DVector<C64>,
    p_in: DVector<f64>,
    rate: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct StepInfo {
    beam: Option<SolveStatus>,
    reflection: Option<SolveStatus>,
    capped: bool,
}

struct Engine<'a> {
    ch: &'a ChannelSet,
    cfg: &'a SystemConfig,
    opts: &'a SolverOptions,
    ideal_gain: f64,
}

impl<'a> Engine<'a> {
    fn new(ch: &'a ChannelSet, cfg: &'a SystemConfig, opts: &'a SolverOptions) -> Self {
        let ideal_gain = opts
            .ideal_gain_db
            .map(db_to_linear)
            .unwrap_or_else(|| cfg.amplifier.peak_linear_gain());
        Self { ch, cfg, opts, ideal_gain }
    }

    fn make(&self, w: BeamformerState, psi: DVector<C64>) -> Iterate {
        let p_in = incident_power(self.ch, &w);
        let rate = sum_rate(self.ch, &w, &psi, self.cfg);
        Iterate { w, psi, p_in, rate }
    }

    fn gain_cap(&self, p_in: &DVector<f64>) -> DVector<f64> {
        match self.opts.mode {
            Mode::PracticalActive => p_in.map(|p| self.cfg.amplifier.amplification_factor(p)),
            Mode::IdealActive => DVector::from_element(p_in.len(), self.ideal_gain),
            Mode::Passive => DVector::from_element(p_in.len(), 1.0),
        }
    }

    fn init(&self) -> Result<Iterate> {
        let cfg = self.cfg;
        let ones = DVector::from_element(cfg.l, C64::new(1.0, 0.0));
        let w = match self.opts.mode {
            Mode::PracticalActive => init::practical_start(self.ch, cfg, self.opts.init_strategy),
            Mode::IdealActive => init::mrt_beams(self.ch, &ones, cfg.p_bs),
            Mode::Passive => {
                // Unit modulus needs p_in + sigma_v^2 <= P_l on every element.
                let room = cfg.p_elem - cfg.sigma_v2;
                if room <= 0.0 {
                    return Err(Error::InfeasibleInit {
                        constraint: ConstraintKind::ElementOutputPower.label(),
                        element: 0,
                    });
                }
                let w = init::mrt_beams(self.ch, &ones, cfg.p_bs);
                let peak = incident_power(self.ch, &w).max();
                if peak > room {
                    w.scaled((room / peak).sqrt())
                } else {
                    w
                }
            }
        };
        let psi = match self.opts.mode {
            Mode::Passive => ones,
            _ => {
                let p = incident_power(self.ch, &w);
                let radii = subproblem::reflection_radii2(&p, &self.gain_cap(&p), cfg);
                DVector::from_iterator(cfg.l, radii.iter().map(|r| C64::new(r.sqrt(), 0.0)))
            }
        };
        Ok(self.make(w, psi))
    }

    fn beam_bounds(&self, it: &Iterate, capped: bool) -> IncidentBounds {
        if self.opts.mode != Mode::PracticalActive {
            return IncidentBounds::none(self.cfg.l);
        }
        let model = &self.cfg.amplifier;
        let lo = model.p_in_min_mw();
        let hi = model.p_in_m_mw();
        let mut bounds = IncidentBounds::none(self.cfg.l);
        for l in 0..self.cfg.l {
            let p = it.p_in[l];
            // The minorant only enters once the anchor itself clears the bound.
            let mut lower = (p >= lo).then_some(lo);
            let mut upper = hi;
            if capped {
                let target = it.psi[l].norm_sqr() * (1.0 - 1e-12);
                if let GainWindow::Interval { lo_mw, hi_mw } = model.gain_window(target) {
                    upper = upper.min(hi_mw);
                    if lo_mw > lo && p >= lo_mw {
                        lower = Some(lo_mw);
                    }
                }
            }
            bounds.lower[l] = lower;
            bounds.upper[l] = Some(upper);
        }
        bounds
    }

    fn step(&self, it: &Iterate, capped: bool) -> Result<(Iterate, StepInfo)> {
        let (ch, cfg) = (self.ch, self.cfg);
        let rho = update_rho(ch, &it.w, &it.psi, cfg);
        let mu = update_mu(ch, &it.w, &it.psi, &rho, cfg);
        let mut info = StepInfo { capped, ..Default::default() };

        let bounds = self.beam_bounds(it, capped);
        let (obj, cons) = assemble_w_subproblem_with(ch, &it.psi, &rho, &mu, cfg, &it.w, &bounds)?;
        let anchor = it.w.stacked();
        let sol = solve_ball_quadratic(&obj, &cons, &anchor, &self.opts.beam_qcqp)?;
        info.beam = Some(sol.status);
        let accept = sol.status != SolveStatus::Infeasible
            && cons.max_relative_violation(&sol.x) <= 1e-8
            && obj.value(&sol.x) >= obj.value(&anchor);
        let w = if accept {
            BeamformerState::from_stacked(cfg.m, cfg.k, &sol.x)
        } else {
            it.w.clone()
        };

        let p_in = incident_power(ch, &w);
        let cap = self.gain_cap(&p_in);
        let (pobj, radii2) = assemble_psi_subproblem(ch, &w, &rho, &mu, cfg, &cap)?;
        let start = DVector::from_fn(cfg.l, |l, _| {
            let z = it.psi[l];
            let r = radii2[l].sqrt();
            if z.norm() > r {
                z * (r / z.norm())
            } else {
                z
            }
        });
        let psi = match self.opts.mode {
            Mode::Passive => self.passive_reflection(&pobj, &radii2, &it.psi, &mut info)?,
            _ => {
                let sol = solve_disk_quadratic(&pobj, &radii2, &start, &self.opts.reflection_qcqp)?;
                info.reflection = Some(sol.status);
                if pobj.value(&sol.x) >= pobj.value(&start) {
                    sol.x
                } else {
                    start
                }
            }
        };
        Ok((self.make(w, psi), info))
    }

    /// Disk relaxation renormalized to unit modulus, refined by unit-modulus
    /// coordinate ascent; also ascends from the previous reflection and keeps
    /// the better of the two.
    fn passive_reflection(
        &self,
        pobj: &QuadraticObjective,
        radii2: &[f64],
        previous: &DVector<C64>,
        info: &mut StepInfo,
    ) -> Result<DVector<C64>> {
        let unit_radii = vec![1.0; radii2.len()];
        let relaxed = solve_disk_quadratic(pobj, &unit_radii, previous, &self.opts.reflection_qcqp)?;
        info.reflection = Some(relaxed.status);
        let projected = DVector::from_fn(previous.len(), |l, _| {
            let z = relaxed.x[l];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                previous[l]
            }
        });
        let sweeps = self.opts.reflection_qcqp.max_iter;
        let a = solve_unit_modulus_quadratic(pobj, &projected, sweeps)?;
        let b = solve_unit_modulus_quadratic(pobj, previous, sweeps)?;
        Ok(if pobj.value(&a) >= pobj.value(&b) { a } else { b })
    }

    fn record(&self, iteration: usize, it: &Iterate, info: StepInfo) -> IterationRecord {
        let min_output = it
            .psi
            .iter()
            .zip(it.p_in.iter())
            .map(|(z, p)| self.cfg.p_elem - z.norm_sqr() * (p + self.cfg.sigma_v2))
            .fold(f64::INFINITY, f64::min);
        IterationRecord {
            iteration,
            sum_rate: it.rate,
            bs_power_slack: self.cfg.p_bs - it.w.total_power(),
            min_output_power_slack: min_output,
            incident_power_mw: it.p_in.iter().copied().collect(),
            regions: it.p_in.iter().map(|&p| self.cfg.amplifier.region_mw(p)).collect(),
            hardware_capped: info.capped,
            beam_status: info.beam,
            reflection_status: info.reflection,
        }
    }

    fn run(&self) -> Result<BcdOutcome> {
        let own = self.run_from(self.init()?)?;
        if self.opts.mode != Mode::PracticalActive || !self.opts.ideal_warm_start {
            return Ok(own);
        }
        let ideal_opts = SolverOptions { mode: Mode::IdealActive, reevaluate_ideal: true, ..*self.opts };
        let ideal = Engine::new(self.ch, self.cfg, &ideal_opts).run()?;
        let warm = self.run_from(self.make(ideal.w, ideal.reflection.psi_vector()))?;
        Ok(if warm.sum_rate > own.sum_rate { warm } else { own })
    }

    fn run_from(&self, start: Iterate) -> Result<BcdOutcome> {
        let mut it = start;
        let mut trace = IterationTrace::default();
        trace.records.push(self.record(0, &it, StepInfo::default()));
        let mut converged = false;
        let mut iterations = 0;
        let mut capped_steps = 0;

        for t in 1..=self.opts.max_outer_iters {
            let (mut next, mut info) = self.step(&it, false)?;
            if self.opts.mode == Mode::PracticalActive && next.rate < it.rate {
                (next, info) = self.step(&it, true)?;
                capped_steps += 1;
            }
            let stalled = next.rate < it.rate;
            if stalled {
                next = it.clone();
            }
            let change = (next.rate - it.rate).abs() / it.rate.abs().max(1e-12);
            it = next;
            iterations = t;
            trace.records.push(self.record(t, &it, info));
            if stalled || change < self.opts.outer_tol {
                converged = true;
                break;
            }
        }

        let design_reflection = ReflectionState::from_psi(&it.psi);
        let design_sum_rate = it.rate;
        let (psi, rate) = if self.opts.mode == Mode::IdealActive && self.opts.reevaluate_ideal {
            let realized = self.realize(&it);
            let rate = sum_rate(self.ch, &it.w, &realized, self.cfg);
            (realized, rate)
        } else {
            (it.psi.clone(), it.rate)
        };
        if let Some(last) = trace.records.last_mut() {
            last.regions = it.p_in.iter().map(|&p| self.cfg.amplifier.region_mw(p)).collect();
        }
        Ok(BcdOutcome {
            mode: self.opts.mode,
            constraints: check_constraints(self.ch, &it.w, &psi, self.cfg),
            reflection: ReflectionState::from_psi(&psi),
            design_reflection,
            w: it.w,
            trace,
            sum_rate: rate,
            design_sum_rate,
            converged,
            iterations,
            hardware_capped_steps: capped_steps,
        })
    }

    /// Clip each designed amplitude to the gain the hardware delivers at the
    /// realized incident power, keeping the phase.
    fn realize(&self, it: &Iterate) -> DVector<C64> {
        DVector::from_fn(self.cfg.l, |l, _| {
            let z = it.psi[l];
            let a = self.cfg.amplifier.amplification_factor(it.p_in[l]);
            if z.norm_sqr() > a {
                z * (a / z.norm_sqr()).sqrt()
            } else {
                z
            }
        })
    }
}
