//! Starting points for the alternating optimizer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::system::{effective_channel, incident_power, BeamformerState, SystemConfig};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// Maximum-ratio beams with equal power split, rescaled into the
    /// incident-power interval when possible.
    #[default]
    MrtScaled,
    /// Maximum-ratio beams at full power, no rescaling.
    MrtFullPower,
}

/// MRT toward the effective channels seen through `psi`, `P_BS / K` per user.
pub fn mrt_beams(channels: &ChannelSet, psi: &DVector<C64>, p_bs: f64) -> BeamformerState {
    let (m, k) = (channels.num_antennas(), channels.num_users());
    let per_user = (p_bs / k as f64).sqrt();
    let cols: Vec<DVector<C64>> = (0..k)
        .map(|j| {
            let h = effective_channel(channels, psi, j);
            let n = h.norm();
            if n > 0.0 {
                h * C64::from(per_user / n)
            } else {
                DVector::from_element(m, C64::from(per_user / (m as f64).sqrt()))
            }
        })
        .collect();
    BeamformerState::from_columns(&cols)
}

/// Common power factor `c^2 <= 1` that moves every incident power into
/// `[lo, hi]`, or the one with the smallest total relative violation.
pub fn interval_scaling(p_in: &DVector<f64>, lo: f64, hi: f64) -> f64 {
    let pmin = p_in.min();
    let pmax = p_in.max();
    if pmax <= 0.0 {
        return 1.0;
    }
    let c_lo = if pmin > 0.0 { lo / pmin } else { f64::INFINITY };
    let c_hi = hi / pmax;
    if c_lo <= c_hi.min(1.0) {
        return c_hi.min(1.0);
    }
    let violation = |c: f64| -> f64 {
        p_in.iter()
            .map(|&p| ((lo - c * p).max(0.0) / lo) + ((c * p - hi).max(0.0) / hi))
            .sum()
    };
    // Piecewise linear in c: the minimum sits at a breakpoint or at c = 1.
    let mut best = (violation(1.0), 1.0);
    for &p in p_in.iter().filter(|p| **p > 0.0) {
        for c in [lo / p, hi / p] {
            if c > 0.0 && c <= 1.0 {
                let v = violation(c);
                if v < best.0 {
                    best = (v, c);
                }
            }
        }
    }
    best.1
}

/// Power iteration on `sum_l pi_l h_l h_l^H` with soft-min weights favouring
/// weakly illuminated elements; returns the beams with the largest smallest
/// incident power seen.
pub fn restore_min_incident(channels: &ChannelSet, start: &BeamformerState, p_bs: f64, iters: usize) -> BeamformerState {
    let h = &channels.h_bs_ris;
    let k = start.num_users();
    let per_user = (p_bs / k as f64).sqrt();
    let mut w = start.clone();
    let mut best = (incident_power(channels, &w).min(), w.clone());
    for _ in 0..iters {
        let p = incident_power(channels, &w);
        let mean = p.mean().max(f64::MIN_POSITIVE);
        let weights = p.map(|x| (-8.0 * x / mean).exp());
        let scaled = DMatrix::from_fn(h.nrows(), h.ncols(), |l, j| h[(l, j)] * weights[l].sqrt());
        let r = scaled.ad_mul(&scaled);
        let cols: Vec<DVector<C64>> = (0..k)
            .map(|j| {
                let v = &r * w.beam(j);
                let n = v.norm();
                if n > 0.0 {
                    v * C64::from(per_user / n)
                } else {
                    w.beam(j)
                }
            })
            .collect();
        w = BeamformerState::from_columns(&cols);
        let floor = incident_power(channels, &w).min();
        if floor > best.0 {
            best = (floor, w.clone());
        }
    }
    best.1
}

/// Initial beams for the practical design: MRT, interval rescaling, then
/// restoration when some element still sits below the lock-in threshold.
pub fn practical_start(channels: &ChannelSet, config: &SystemConfig, strategy: InitStrategy) -> BeamformerState {
    let psi = DVector::from_element(config.l, C64::new(1.0, 0.0));
    let mrt = mrt_beams(channels, &psi, config.p_bs);
    if strategy == InitStrategy::MrtFullPower {
        return mrt;
    }
    let lo = config.amplifier.p_in_min_mw();
    let hi = config.amplifier.p_in_m_mw();
    let scaled = mrt.scaled(interval_scaling(&incident_power(channels, &mrt), lo, hi).sqrt());
    let p = incident_power(channels, &scaled);
    if p.min() >= lo && p.max() <= hi {
        return scaled;
    }
    let restored = restore_min_incident(channels, &mrt, config.p_bs, 30);
    let c = interval_scaling(&incident_power(channels, &restored), lo, hi);
    let restored = restored.scaled(c.sqrt());
    let pr = incident_power(channels, &restored);
    let score = |p: &DVector<f64>| p.iter().filter(|&&x| x >= lo && x <= hi).count();
    if score(&pr) > score(&p) || (score(&pr) == score(&p) && pr.min() > p.min()) {
        restored
    } else {
        scaled
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_prefers_largest_feasible_factor() {
        let p = DVector::from_vec(vec![2.0, 4.0]);
        assert_eq!(interval_scaling(&p, 1.0, 10.0), 1.0);
        assert!((interval_scaling(&p, 1.0, 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scaling_minimizes_violation_when_infeasible() {
        // Spread too wide for [1, 2]: any factor leaves a violation.
        let p = DVector::from_vec(vec![1.0, 10.0]);
        let c = interval_scaling(&p, 1.0, 2.0);
        assert!(c > 0.0 && c <= 1.0);
        // Lower bound out of reach even at full power.
        let p = DVector::from_vec(vec![0.1, 0.2]);
        assert_eq!(interval_scaling(&p, 1.0, 2.0), 1.0);
    }
}
