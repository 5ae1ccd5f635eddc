//! Assembly of the transmit-beam and reflection subproblems.
//!
//! Stacked beams `w = [w_1; ...; w_K]` have length `M K`; the per-element
//! incident power is `w^H G_l w` with `G_l = I_K ⊗ h_l h_l^H`.

use nalgebra::{DMatrix, DVector};

use crate::channel::ChannelSet;
use crate::qcqp::{mm_linearize, AffineLower, ConstraintSet, QuadForm, QuadUpper, QuadraticObjective};
use crate::system::{effective_channels, BeamformerState, SystemConfig};
use crate::{Error, Result, C64};

/// Optional per-element bounds on the incident power used by the beam step.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidentBounds {
    /// Lower bound, enforced through the MM minorant at the anchor.
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

impl IncidentBounds {
    pub fn none(l: usize) -> Self {
        Self {
            lower: vec![None; l],
            upper: vec![None; l],
        }
    }

    /// The linear amplification interval on every element.
    pub fn interval(config: &SystemConfig) -> Self {
        Self {
            lower: vec![Some(config.amplifier.p_in_min_mw()); config.l],
            upper: vec![Some(config.amplifier.p_in_m_mw()); config.l],
        }
    }
}

/// `G_l = I_K ⊗ h_l h_l^H`, where `h_l^H` is row `l` of the BS→RIS channel.
pub fn incident_form(channels: &ChannelSet, l: usize) -> QuadForm {
    let h = &channels.h_bs_ris;
    let m = channels.num_antennas();
    let inner = DMatrix::from_fn(m, m, |a, b| h[(l, a)].conj() * h[(l, b)]);
    QuadForm::Kron {
        blocks: channels.num_users(),
        inner,
    }
}

fn check_aux(channels: &ChannelSet, rho: &DVector<f64>, mu: &DVector<C64>) -> Result<()> {
    let k = channels.num_users();
    if rho.len() != k || mu.len() != k {
        return Err(Error::Dimension(format!(
            "auxiliaries have lengths {} and {}, expected {k}",
            rho.len(),
            mu.len()
        )));
    }
    Ok(())
}

/// Beam subproblem with the full interval `[P_in_min, P_in_m]` on every element.
pub fn assemble_w_subproblem(
    channels: &ChannelSet,
    psi: &DVector<C64>,
    rho: &DVector<f64>,
    mu: &DVector<C64>,
    config: &SystemConfig,
    w_t: &BeamformerState,
) -> Result<(QuadraticObjective, ConstraintSet)> {
    assemble_w_subproblem_with(channels, psi, rho, mu, config, w_t, &IncidentBounds::interval(config))
}

/// Beam subproblem: maximize `Re{lambda^H w} - w^H E w` over
///
/// - `||w||^2 <= P_BS`,
/// - `w^H G_l w <= min(P_l / |psi_l|^2 - sigma_v^2, upper_l)`,
/// - `2 Re{(G_l w_t)^H w} - w_t^H G_l w_t >= lower_l`.
///
/// The output-power and upper incident bounds act on the same quadratic form,
/// so each element contributes a single upper constraint.
pub fn assemble_w_subproblem_with(
    channels: &ChannelSet,
    psi: &DVector<C64>,
    rho: &DVector<f64>,
    mu: &DVector<C64>,
    config: &SystemConfig,
    w_t: &BeamformerState,
    bounds: &IncidentBounds,
) -> Result<(QuadraticObjective, ConstraintSet)> {
    config.check_channels(channels)?;
    check_aux(channels, rho, mu)?;
    let (m, k, l) = (config.m, config.k, config.l);
    if psi.len() != l || bounds.lower.len() != l || bounds.upper.len() != l {
        return Err(Error::Dimension("reflection vector or bounds do not match L".into()));
    }
    if w_t.num_antennas() != m || w_t.num_users() != k {
        return Err(Error::Dimension("anchor beams do not match M x K".into()));
    }

    let hbar = effective_channels(channels, psi);
    let mut lin = DVector::zeros(m * k);
    let mut inner = DMatrix::<C64>::zeros(m, m);
    for j in 0..k {
        let col = hbar.column(j);
        lin.rows_mut(j * m, m).copy_from(&(col * (mu[j] * (2.0 * (1.0 + rho[j]).sqrt()))));
        inner += col * col.adjoint() * C64::from(mu[j].norm_sqr());
    }
    let obj = QuadraticObjective {
        lin,
        quad: QuadForm::Kron { blocks: k, inner },
    };

    let anchor = w_t.stacked();
    let mut cons = ConstraintSet {
        ball_radius2: Some(config.p_bs),
        ..Default::default()
    };
    for e in 0..l {
        let form = incident_form(channels, e);
        let a = psi[e].norm_sqr();
        let output_cap = if a > 0.0 {
            Some(config.p_elem / a - config.sigma_v2)
        } else {
            None
        };
        let upper = match (output_cap, bounds.upper[e]) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
        if let Some(lower) = bounds.lower[e] {
            cons.affine_lower.push(AffineLower {
                minorant: mm_linearize(&form, &anchor),
                bound: lower,
            });
        }
        if let Some(bound) = upper {
            cons.quad_upper.push(QuadUpper { form, bound });
        }
    }
    Ok((obj, cons))
}

/// Per-element disk radius `min(a_l, P_l / (p_in,l + sigma_v^2))`.
pub fn reflection_radii2(p_in: &DVector<f64>, gain_cap: &DVector<f64>, config: &SystemConfig) -> Vec<f64> {
    p_in.iter()
        .zip(gain_cap.iter())
        .map(|(p, a)| a.min(config.p_elem / (p + config.sigma_v2)))
        .collect()
}

/// Reflection subproblem: maximize `2 Re{Lambda^H psi} - psi^H Pi psi` over
/// `|psi_l|^2 <= min(a_l, P_l / (p_in,l + sigma_v^2))`.
///
/// With `c_{k,i} = conj(g_k) ∘ (H w_i)` one has `hbar_k^H w_i = c_{k,i}^T psi`, so
///
/// - `Lambda = sum_k sqrt(1 + rho_k) mu_k conj(c_{k,k})`,
/// - `Pi = sum_k |mu_k|^2 (sum_i conj(c_{k,i}) c_{k,i}^T + sigma_v^2 diag(|g_k|^2))`.
pub fn assemble_psi_subproblem(
    channels: &ChannelSet,
    w: &BeamformerState,
    rho: &DVector<f64>,
    mu: &DVector<C64>,
    config: &SystemConfig,
    gain_cap: &DVector<f64>,
) -> Result<(QuadraticObjective, Vec<f64>)> {
    config.check_channels(channels)?;
    check_aux(channels, rho, mu)?;
    let (k, l) = (config.k, config.l);
    if gain_cap.len() != l {
        return Err(Error::Dimension(format!("gain caps have length {}, expected {l}", gain_cap.len())));
    }
    if w.num_antennas() != config.m || w.num_users() != k {
        return Err(Error::Dimension("beams do not match M x K".into()));
    }

    let hw = &channels.h_bs_ris * w.matrix();
    let mut lambda = DVector::<C64>::zeros(l);
    let mut pi = DMatrix::<C64>::zeros(l, l);
    for j in 0..k {
        let g = &channels.h_ris_user[j];
        let weight = mu[j].norm_sqr();
        for i in 0..k {
            // conj(c_{j,i}) = g_j ∘ conj(H w_i)
            let d = g.zip_map(&hw.column(i), |g, x| g * x.conj());
            if i == j {
                lambda.axpy(mu[j] * (1.0 + rho[j]).sqrt(), &d, C64::new(1.0, 0.0));
            }
            if weight > 0.0 {
                pi.gerc(C64::from(weight), &d, &d, C64::new(1.0, 0.0));
            }
        }
        for e in 0..l {
            pi[(e, e)] += weight * config.sigma_v2 * g[e].norm_sqr();
        }
    }
    let p_in = DVector::from_fn(l, |e, _| hw.row(e).iter().map(|z| z.norm_sqr()).sum());
    let radii2 = reflection_radii2(&p_in, gain_cap, config);
    Ok((
        QuadraticObjective {
            lin: lambda * C64::from(2.0),
            quad: QuadForm::Dense(pi),
        },
        radii2,
    ))
}
