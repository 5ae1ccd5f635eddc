//! Seeded Monte Carlo sweeps.
//!
//! Each (sweep point, realization) cell draws its own user positions and
//! channels from a generator seeded by [`cell_seed`], then runs every
//! requested mode on the same channels. Cells run in parallel; results are
//! collected in cell order, so output does not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, SweepVariable};
use crate::channel::ChannelSet;
use crate::solver::{run_bcd, BcdOutcome, Mode};
use crate::Result;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator seed of one cell.
pub fn cell_seed(seed: u64, point: usize, realization: usize) -> u64 {
    seed ^ splitmix64(((point as u64) << 32) | realization as u64)
}

/// One mode on one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationRecord {
    pub mode: Mode,
    pub point_index: usize,
    pub sweep_value: f64,
    pub realization: usize,
    pub seed: u64,
    /// `None` when the run failed.
    pub sum_rate: Option<f64>,
    pub design_sum_rate: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub interval_feasible: bool,
    /// `[linear, saturated, reflect_only]` shares at the deployed state.
    pub region_fractions: [f64; 3],
    pub error: Option<String>,
}

impl RealizationRecord {
    fn from_outcome(base: Self, out: &BcdOutcome) -> Self {
        Self {
            sum_rate: Some(out.sum_rate),
            design_sum_rate: Some(out.design_sum_rate),
            converged: out.converged,
            iterations: out.iterations,
            interval_feasible: out.interval_feasible(),
            region_fractions: out.region_fractions(),
            ..base
        }
    }
}

/// Aggregate of one mode at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub mode: Mode,
    pub point_index: usize,
    pub sweep_value: f64,
    /// NaN when every realization failed.
    pub mean_sum_rate: f64,
    /// Standard error of the mean; 0 with fewer than two samples.
    pub std_err: f64,
    pub min_sum_rate: f64,
    pub max_sum_rate: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    pub converged_fraction: f64,
    pub mean_iterations: f64,
    pub region_fractions: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub modes: Vec<Mode>,
    /// Ordered by mode (as requested), then sweep point.
    pub summaries: Vec<PointSummary>,
    /// Ordered by sweep point, realization, then mode.
    pub records: Vec<RealizationRecord>,
}

impl SweepResult {
    pub fn summary(&self, mode: Mode, point_index: usize) -> Option<&PointSummary> {
        self.summaries.iter().find(|s| s.mode == mode && s.point_index == point_index)
    }

    /// Mean sum-rates of `mode` along the sweep.
    pub fn means(&self, mode: Mode) -> Vec<f64> {
        (0..self.sweep_values.len())
            .map(|i| self.summary(mode, i).map_or(f64::NAN, |s| s.mean_sum_rate))
            .collect()
    }
}

/// Runs every requested mode on one cell.
pub fn run_cell(exp: &ExperimentConfig, point_index: usize, realization: usize) -> Vec<RealizationRecord> {
    let value = exp.sweep_values[point_index];
    let seed = cell_seed(exp.seed, point_index, realization);
    let base = RealizationRecord {
        mode: Mode::PracticalActive,
        point_index,
        sweep_value: value,
        realization,
        seed,
        sum_rate: None,
        design_sum_rate: None,
        converged: false,
        iterations: 0,
        interval_feasible: false,
        region_fractions: [0.0; 3],
        error: None,
    };
    let (system, mut geometry) = exp.point(value);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    geometry.draw_users(system.k, &mut rng);
    let channels = ChannelSet::generate(&geometry, &exp.path_loss, exp.rician_factor, system.m, system.l, &mut rng);
    exp.modes
        .iter()
        .map(|&mode| {
            let base = RealizationRecord { mode, ..base.clone() };
            let run = channels
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|ch| run_bcd(ch, &system, &exp.solver.options(mode)).map_err(|e| e.to_string()));
            match run {
                Ok(out) => RealizationRecord::from_outcome(base, &out),
                Err(e) => RealizationRecord { error: Some(e), ..base },
            }
        })
        .collect()
}

fn summarize(mode: Mode, point_index: usize, sweep_value: f64, records: &[&RealizationRecord]) -> PointSummary {
    let ok: Vec<&RealizationRecord> = records.iter().copied().filter(|r| r.sum_rate.is_some()).collect();
    let rates: Vec<f64> = ok.iter().filter_map(|r| r.sum_rate).collect();
    let n = rates.len();
    let nf = n as f64;
    let mean = if n == 0 { f64::NAN } else { rates.iter().sum::<f64>() / nf };
    let std_err = if n < 2 {
        0.0
    } else {
        let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        (var / nf).sqrt()
    };
    let avg = |f: &dyn Fn(&RealizationRecord) -> f64| {
        if n == 0 {
            f64::NAN
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / nf
        }
    };
    PointSummary {
        mode,
        point_index,
        sweep_value,
        mean_sum_rate: mean,
        std_err,
        min_sum_rate: rates.iter().copied().fold(f64::NAN, f64::min),
        max_sum_rate: rates.iter().copied().fold(f64::NAN, f64::max),
        n_ok: n,
        n_failed: records.len() - n,
        converged_fraction: avg(&|r| if r.converged { 1.0 } else { 0.0 }),
        mean_iterations: avg(&|r| r.iterations as f64),
        region_fractions: [
            avg(&|r| r.region_fractions[0]),
            avg(&|r| r.region_fractions[1]),
            avg(&|r| r.region_fractions[2]),
        ],
    }
}

/// Runs the whole sweep. Deterministic given the configuration.
pub fn run_sweep(exp: &ExperimentConfig) -> Result<SweepResult> {
    exp.validate()?;
    let cells: Vec<(usize, usize)> = (0..exp.sweep_values.len())
        .flat_map(|p| (0..exp.realizations).map(move |r| (p, r)))
        .collect();
    let records: Vec<RealizationRecord> = cells
        .par_iter()
        .map(|&(p, r)| run_cell(exp, p, r))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let summaries = exp
        .modes
        .iter()
        .flat_map(|&mode| {
            let records = &records;
            exp.sweep_values.iter().enumerate().map(move |(p, &value)| {
                let cell: Vec<&RealizationRecord> =
                    records.iter().filter(|r| r.mode == mode && r.point_index == p).collect();
                summarize(mode, p, value, &cell)
            })
        })
        .collect();
    Ok(SweepResult {
        sweep_variable: exp.sweep_variable,
        sweep_values: exp.sweep_values.clone(),
        modes: exp.modes.clone(),
        summaries,
        records,
    })
}
