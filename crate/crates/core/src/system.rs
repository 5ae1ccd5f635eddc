//! Downlink signal model of the active-RIS assisted MU-MISO link.
//!
//! Notation used in this module:
//!
//! - `H` (`L x M`): BS→RIS channel, row `l` is `h_l^H`.
//! - `g_k` (`L`): RIS→user-`k` channel.
//! - `psi` (`L`): combined reflection coefficients `sqrt(a_l) e^{j theta_l}`.
//! - `hbar_k^H = g_k^H diag(psi) H`: effective BS→user-`k` channel.
//!
//! All powers are linear, in mW.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::amplifier::AmplifierModel;
use crate::channel::ChannelSet;
use crate::units::dbm_to_mw;
use crate::{Error, Result, C64};

/// Relative tolerance used when flagging constraint violations.
pub const CONSTRAINT_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// BS antennas.
    pub m: usize,
    /// Single-antenna users.
    pub k: usize,
    /// RIS elements.
    pub l: usize,
    /// BS transmit budget, mW.
    pub p_bs: f64,
    /// Per-element RIS output budget, mW.
    pub p_elem: f64,
    /// Amplifier noise power at the RIS, mW.
    pub sigma_v2: f64,
    /// Receiver noise power at each user, mW.
    pub sigma2: f64,
    pub amplifier: AmplifierModel,
}

impl Default for SystemConfig {
    /// M = K = 4, L = 64, P_BS = 10 dBm, P_l = 0.1 dBm, noise -90 dBm.
    fn default() -> Self {
        Self {
            m: 4,
            k: 4,
            l: 64,
            p_bs: dbm_to_mw(10.0),
            p_elem: dbm_to_mw(0.1),
            sigma_v2: dbm_to_mw(-90.0),
            sigma2: dbm_to_mw(-90.0),
            amplifier: AmplifierModel::default(),
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 || self.l == 0 {
            return Err(Error::Config("M, K and L must all be at least 1".into()));
        }
        for (name, v) in [
            ("p_bs", self.p_bs),
            ("p_elem", self.p_elem),
            ("sigma_v2", self.sigma_v2),
            ("sigma2", self.sigma2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a positive finite power, got {v}")));
            }
        }
        Ok(())
    }

    /// Checks that a channel realization matches the configured dimensions.
    pub fn check_channels(&self, channels: &ChannelSet) -> Result<()> {
        let (l, m, k) = (channels.num_elements(), channels.num_antennas(), channels.num_users());
        if (l, m, k) != (self.l, self.m, self.k) {
            return Err(Error::Dimension(format!(
                "channels are L={l}, M={m}, K={k} but config is L={}, M={}, K={}",
                self.l, self.m, self.k
            )));
        }
        Ok(())
    }
}

/// Transmit beams, stored as an `M x K` matrix whose column `k` is `w_k`.
///
/// Column-major storage means the flattened matrix is the stacked vector
/// `[w_1; ...; w_K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerState {
    w: DMatrix<C64>,
}

impl BeamformerState {
    pub fn zeros(m: usize, k: usize) -> Self {
        Self { w: DMatrix::zeros(m, k) }
    }

    pub fn from_matrix(w: DMatrix<C64>) -> Self {
        Self { w }
    }

    pub fn from_columns(cols: &[DVector<C64>]) -> Self {
        Self {
            w: DMatrix::from_columns(cols),
        }
    }

    pub fn from_stacked(m: usize, k: usize, stacked: &DVector<C64>) -> Self {
        Self {
            w: DMatrix::from_column_slice(m, k, stacked.as_slice()),
        }
    }

    pub fn stacked(&self) -> DVector<C64> {
        DVector::from_column_slice(self.w.as_slice())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.w
    }

    pub fn beam(&self, k: usize) -> DVector<C64> {
        self.w.column(k).into_owned()
    }

    pub fn num_antennas(&self) -> usize {
        self.w.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.w.ncols()
    }

    /// `sum_k ||w_k||^2`.
    pub fn total_power(&self) -> f64 {
        self.w.norm_squared()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { w: &self.w * C64::from(c) }
    }
}

/// Per-element amplification and phase, plus the combined coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionState {
    /// Power gains `a_l = |psi_l|^2`.
    pub a: Vec<f64>,
    /// Phases `theta_l`, radians.
    pub theta: Vec<f64>,
    #[serde(with = "complex_vec")]
    pub psi: Vec<C64>,
}

impl ReflectionState {
    pub fn from_psi(psi: &DVector<C64>) -> Self {
        Self {
            a: psi.iter().map(|z| z.norm_sqr()).collect(),
            theta: psi.iter().map(|z| z.arg()).collect(),
            psi: psi.iter().copied().collect(),
        }
    }

    pub fn from_gain_phase(a: &[f64], theta: &[f64]) -> Result<Self> {
        if a.len() != theta.len() {
            return Err(Error::Dimension("gain and phase vectors differ in length".into()));
        }
        if a.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Domain("amplification factors must be non-negative".into()));
        }
        let psi = a.iter().zip(theta).map(|(&a, &t)| C64::from_polar(a.sqrt(), t)).collect();
        Ok(Self {
            a: a.to_vec(),
            theta: theta.to_vec(),
            psi,
        })
    }

    pub fn psi_vector(&self) -> DVector<C64> {
        DVector::from_vec(self.psi.clone())
    }

    /// `|psi_l|^2 == a_l` within `1e-9` relative.
    pub fn is_synchronized(&self) -> bool {
        self.a
            .iter()
            .zip(&self.psi)
            .all(|(&a, z)| (z.norm_sqr() - a).abs() <= 1e-9 * a.max(1e-300))
    }
}

/// FP auxiliaries: `rho_k >= 0` and complex `mu_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryState {
    pub rho: DVector<f64>,
    pub mu: DVector<C64>,
}

pub(crate) mod complex_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::C64;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

/// `p_in,l = sum_k |h_l^H w_k|^2` for every element.
pub fn incident_power(channels: &ChannelSet, w: &BeamformerState) -> DVector<f64> {
    let hw = &channels.h_bs_ris * w.matrix();
    DVector::from_fn(hw.nrows(), |l, _| hw.row(l).iter().map(|z| z.norm_sqr()).sum())
}

/// Column vector `hbar_k` such that `hbar_k^H = g_k^H diag(psi) H`.
pub fn effective_channel(channels: &ChannelSet, psi: &DVector<C64>, k: usize) -> DVector<C64> {
    let weights = channels.h_ris_user[k].zip_map(psi, |g, p| g * p.conj());
    channels.h_bs_ris.ad_mul(&weights)
}

/// Same row vector written as a linear form in `psi`:
/// `hbar_k^H = psi^T diag(g_k^*) H`.
pub fn effective_channel_reflection_form(channels: &ChannelSet, psi: &DVector<C64>, k: usize) -> DVector<C64> {
    let g = &channels.h_ris_user[k];
    let m = channels.num_antennas();
    let mut row = DVector::<C64>::zeros(m);
    for (l, (p, gl)) in psi.iter().zip(g.iter()).enumerate() {
        let coeff = p * gl.conj();
        for j in 0..m {
            row[j] += coeff * channels.h_bs_ris[(l, j)];
        }
    }
    // `row` holds hbar_k^H; return hbar_k.
    row.map(|z| z.conj())
}

/// All effective channels as the columns of an `M x K` matrix.
pub fn effective_channels(channels: &ChannelSet, psi: &DVector<C64>) -> DMatrix<C64> {
    let cols: Vec<_> = (0..channels.num_users()).map(|k| effective_channel(channels, psi, k)).collect();
    DMatrix::from_columns(&cols)
}

/// `K x K` matrix of `hbar_k^H w_i` (row `k`, column `i`).
pub fn cross_gains(channels: &ChannelSet, w: &BeamformerState, psi: &DVector<C64>) -> DMatrix<C64> {
    effective_channels(channels, psi).ad_mul(w.matrix())
}

/// `||g_k^H diag(psi)||^2`, the gain applied to the RIS noise at user `k`.
pub fn ris_noise_gain(channels: &ChannelSet, psi: &DVector<C64>, k: usize) -> f64 {
    channels.h_ris_user[k]
        .iter()
        .zip(psi.iter())
        .map(|(g, p)| g.norm_sqr() * p.norm_sqr())
        .sum()
}

/// Per-user signal power, interference-plus-noise and total received power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub signal: f64,
    pub interference: f64,
    pub noise: f64,
}

impl LinkBudget {
    pub fn sinr(&self) -> f64 {
        self.signal / (self.interference + self.noise)
    }

    /// Denominator including the desired signal.
    pub fn total(&self) -> f64 {
        self.signal + self.interference + self.noise
    }
}

pub fn link_budgets(channels: &ChannelSet, w: &BeamformerState, psi: &DVector<C64>, config: &SystemConfig) -> Vec<LinkBudget> {
    let f = cross_gains(channels, w, psi);
    (0..channels.num_users())
        .map(|k| {
            let signal = f[(k, k)].norm_sqr();
            let interference = (0..f.ncols()).filter(|&i| i != k).map(|i| f[(k, i)].norm_sqr()).sum();
            let noise = ris_noise_gain(channels, psi, k) * config.sigma_v2 + config.sigma2;
            LinkBudget {
                signal,
                interference,
                noise,
            }
        })
        .collect()
}

pub fn sinr(channels: &ChannelSet, w: &BeamformerState, psi: &DVector<C64>, config: &SystemConfig, k: usize) -> f64 {
    link_budgets(channels, w, psi, config)[k].sinr()
}

pub fn sinrs(channels: &ChannelSet, w: &BeamformerState, psi: &DVector<C64>, config: &SystemConfig) -> Vec<f64> {
    link_budgets(channels, w, psi, config).iter().map(LinkBudget::sinr).collect()
}

/// `sum_k log2(1 + gamma_k)`, bits/s/Hz.
pub fn sum_rate(channels: &ChannelSet, w: &BeamformerState, psi: &DVector<C64>, config: &SystemConfig) -> f64 {
    sinrs(channels, w, psi, config).into_iter().map(|g| (1.0 + g).log2()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// `sum_k ||w_k||^2 <= P_BS`
    BsPower,
    /// `|psi_l|^2 (p_in,l + sigma_v^2) <= P_l`
    ElementOutputPower,
    /// `p_in,l >= P_in_min`
    IncidentLower,
    /// `p_in,l <= P_in_m`
    IncidentUpper,
}

impl ConstraintKind {
    pub fn label(&self) -> &'static str {
        match self {
            ConstraintKind::BsPower => "bs_power",
            ConstraintKind::ElementOutputPower => "element_output_power",
            ConstraintKind::IncidentLower => "incident_power_lower",
            ConstraintKind::IncidentUpper => "incident_power_upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintKind,
    pub element: Option<usize>,
    /// How far past the bound, in the constraint's own units (mW).
    pub amount: f64,
}

/// Slack of every constraint; negative slack means the bound is exceeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub bs_power_slack: f64,
    pub output_power_slack: Vec<f64>,
    pub incident_lower_slack: Vec<f64>,
    pub incident_upper_slack: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Feasible once the incident-interval constraints are set aside.
    pub fn is_feasible_without_interval(&self) -> bool {
        self.violations
            .iter()
            .all(|v| matches!(v.constraint, ConstraintKind::IncidentLower | ConstraintKind::IncidentUpper))
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.violations.iter().filter(|v| v.constraint == kind).count()
    }
}

fn violated(slack: f64, bound: f64) -> bool {
    slack < -CONSTRAINT_REL_TOL * bound.abs().max(f64::MIN_POSITIVE)
}

pub fn check_constraints(channels: &ChannelSet, w: &BeamformerState, psi: &DVector<C64>, config: &SystemConfig) -> ConstraintReport {
    let p_in = incident_power(channels, w);
    let lo = config.amplifier.p_in_min_mw();
    let hi = config.amplifier.p_in_m_mw();
    let mut violations = Vec::new();

    let bs_power_slack = config.p_bs - w.total_power();
    if violated(bs_power_slack, config.p_bs) {
        violations.push(Violation {
            constraint: ConstraintKind::BsPower,
            element: None,
            amount: -bs_power_slack,
        });
    }

    let mut output_power_slack = Vec::with_capacity(p_in.len());
    let mut incident_lower_slack = Vec::with_capacity(p_in.len());
    let mut incident_upper_slack = Vec::with_capacity(p_in.len());
    for (l, (&p, z)) in p_in.iter().zip(psi.iter()).enumerate() {
        let out = config.p_elem - z.norm_sqr() * (p + config.sigma_v2);
        let low = p - lo;
        let up = hi - p;
        for (kind, slack, bound) in [
            (ConstraintKind::ElementOutputPower, out, config.p_elem),
            (ConstraintKind::IncidentLower, low, lo),
            (ConstraintKind::IncidentUpper, up, hi),
        ] {
            if violated(slack, bound) {
                violations.push(Violation {
                    constraint: kind,
                    element: Some(l),
                    amount: -slack,
                });
            }
        }
        output_power_slack.push(out);
        incident_lower_slack.push(low);
        incident_upper_slack.push(up);
    }

    ConstraintReport {
        bs_power_slack,
        output_power_slack,
        incident_lower_slack,
        incident_upper_slack,
        violations,
    }
}
