//! Closed-form auxiliary updates and the two fractional-programming surrogates.
//!
//! Both surrogates use natural logarithms divided by `ln 2`, so they are
//! measured in bits/s/Hz like the sum-rate and `rho = sinr` is their exact
//! stationary point.

use std::f64::consts::LN_2;

use nalgebra::DVector;

use crate::channel::ChannelSet;
use crate::system::{cross_gains, link_budgets, BeamformerState, SystemConfig};
use crate::C64;

/// `rho_k = gamma_k`.
pub fn update_rho(channels: &ChannelSet, w: &BeamformerState, psi: &DVector<C64>, config: &SystemConfig) -> DVector<f64> {
    DVector::from_iterator(
        channels.num_users(),
        link_budgets(channels, w, psi, config).iter().map(|b| b.sinr()),
    )
}

/// `mu_k = sqrt(1 + rho_k) hbar_k^H w_k / (sum_i |hbar_k^H w_i|^2 + noise_k)`.
pub fn update_mu(
    channels: &ChannelSet,
    w: &BeamformerState,
    psi: &DVector<C64>,
    rho: &DVector<f64>,
    config: &SystemConfig,
) -> DVector<C64> {
    let f = cross_gains(channels, w, psi);
    let budgets = link_budgets(channels, w, psi, config);
    DVector::from_fn(channels.num_users(), |k, _| {
        f[(k, k)] * ((1.0 + rho[k]).sqrt() / budgets[k].total())
    })
}

/// Lagrangian-dual surrogate; equals the sum-rate at `rho = update_rho(..)`.
pub fn eval_f1(
    channels: &ChannelSet,
    w: &BeamformerState,
    psi: &DVector<C64>,
    rho: &DVector<f64>,
    config: &SystemConfig,
) -> f64 {
    link_budgets(channels, w, psi, config)
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let r = rho[k];
            (1.0 + r).ln() - r + (1.0 + r) * b.signal / b.total()
        })
        .sum::<f64>()
        / LN_2
}

/// Quadratic-transform surrogate; equals `eval_f1` at `mu = update_mu(..)`.
pub fn eval_f2(
    channels: &ChannelSet,
    w: &BeamformerState,
    psi: &DVector<C64>,
    rho: &DVector<f64>,
    mu: &DVector<C64>,
    config: &SystemConfig,
) -> f64 {
    let f = cross_gains(channels, w, psi);
    link_budgets(channels, w, psi, config)
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let r = rho[k];
            (1.0 + r).ln() - r + 2.0 * (1.0 + r).sqrt() * (mu[k].conj() * f[(k, k)]).re
                - mu[k].norm_sqr() * b.total()
        })
        .sum::<f64>()
        / LN_2
}
