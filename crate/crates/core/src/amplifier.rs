//! Reflection-amplifier response of one active RIS element.
//!
//! Three regimes, selected by the incident power `p` (dBm):
//!
//! | region        | interval                  | gain (dB)                     |
//! |---------------|---------------------------|-------------------------------|
//! | linear        | `[p_in_min, p_in_m]`      | `slope * p + intercept`       |
//! | saturated     | `(p_in_m, p_in_max]`      | `p_out_sat - p`               |
//! | reflect-only  | anything else             | `0`                           |
//!
//! `p_out_sat` is derived from the linear law at `p_in_m`, so the gain is
//! continuous there. The only discontinuities are the lock-in edges
//! `p_in_min` and `p_in_max`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::system::{incident_power, BeamformerState};
use crate::units::{db_to_linear, dbm_to_mw, linear_to_db, mw_to_dbm};
use crate::{Error, Result};

/// Lower lock-in threshold of the default model, dBm.
pub const DEFAULT_P_IN_MIN_DBM: f64 = -100.0;
/// Upper edge of the linear interval of the default model, dBm.
pub const DEFAULT_P_IN_M_DBM: f64 = 10.0;
/// Upper lock-in threshold of the default model, dBm.
pub const DEFAULT_P_IN_MAX_DBM: f64 = 20.0;
/// Fitted slope of the linear-region gain, dB per dBm.
pub const DEFAULT_LINEAR_SLOPE: f64 = -0.195;
/// Fitted intercept of the linear-region gain, dB.
pub const DEFAULT_LINEAR_INTERCEPT_DB: f64 = 22.46;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplifierRegion {
    Linear,
    Saturated,
    ReflectOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AmplifierParams", into = "AmplifierParams")]
pub struct AmplifierModel {
    p_in_min_dbm: f64,
    p_in_m_dbm: f64,
    p_in_max_dbm: f64,
    linear_slope: f64,
    linear_intercept_db: f64,
    p_out_sat_dbm: f64,
}

/// Serialized form of [`AmplifierModel`]; the saturation level is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplifierParams {
    pub p_in_min_dbm: f64,
    pub p_in_m_dbm: f64,
    pub p_in_max_dbm: f64,
    pub linear_slope_db_per_dbm: f64,
    pub linear_intercept_db: f64,
}

impl Default for AmplifierParams {
    fn default() -> Self {
        Self {
            p_in_min_dbm: DEFAULT_P_IN_MIN_DBM,
            p_in_m_dbm: DEFAULT_P_IN_M_DBM,
            p_in_max_dbm: DEFAULT_P_IN_MAX_DBM,
            linear_slope_db_per_dbm: DEFAULT_LINEAR_SLOPE,
            linear_intercept_db: DEFAULT_LINEAR_INTERCEPT_DB,
        }
    }
}

impl TryFrom<AmplifierParams> for AmplifierModel {
    type Error = Error;

    fn try_from(p: AmplifierParams) -> Result<Self> {
        Self::new(
            p.p_in_min_dbm,
            p.p_in_m_dbm,
            p.p_in_max_dbm,
            p.linear_slope_db_per_dbm,
            p.linear_intercept_db,
        )
    }
}

impl From<AmplifierModel> for AmplifierParams {
    fn from(m: AmplifierModel) -> Self {
        Self {
            p_in_min_dbm: m.p_in_min_dbm,
            p_in_m_dbm: m.p_in_m_dbm,
            p_in_max_dbm: m.p_in_max_dbm,
            linear_slope_db_per_dbm: m.linear_slope,
            linear_intercept_db: m.linear_intercept_db,
        }
    }
}

impl Default for AmplifierModel {
    fn default() -> Self {
        Self::new(
            DEFAULT_P_IN_MIN_DBM,
            DEFAULT_P_IN_M_DBM,
            DEFAULT_P_IN_MAX_DBM,
            DEFAULT_LINEAR_SLOPE,
            DEFAULT_LINEAR_INTERCEPT_DB,
        )
        .expect("default amplifier thresholds are ordered")
    }
}

/// Incident powers (mW) for which the hardware gain reaches a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainWindow {
    /// Target is at most 0 dB: any incident power works.
    Any,
    Interval { lo_mw: f64, hi_mw: f64 },
    Empty,
}

impl AmplifierModel {
    pub fn new(
        p_in_min_dbm: f64,
        p_in_m_dbm: f64,
        p_in_max_dbm: f64,
        linear_slope: f64,
        linear_intercept_db: f64,
    ) -> Result<Self> {
        let vals = [p_in_min_dbm, p_in_m_dbm, p_in_max_dbm, linear_slope, linear_intercept_db];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("amplifier parameters must be finite".into()));
        }
        if !(p_in_min_dbm < p_in_m_dbm && p_in_m_dbm < p_in_max_dbm) {
            return Err(Error::Config(format!(
                "amplifier thresholds must satisfy p_in_min < p_in_m < p_in_max, got {p_in_min_dbm} / {p_in_m_dbm} / {p_in_max_dbm}"
            )));
        }
        let p_out_sat_dbm = p_in_m_dbm + linear_slope * p_in_m_dbm + linear_intercept_db;
        Ok(Self {
            p_in_min_dbm,
            p_in_m_dbm,
            p_in_max_dbm,
            linear_slope,
            linear_intercept_db,
            p_out_sat_dbm,
        })
    }

    pub fn p_in_min_dbm(&self) -> f64 {
        self.p_in_min_dbm
    }

    pub fn p_in_m_dbm(&self) -> f64 {
        self.p_in_m_dbm
    }

    pub fn p_in_max_dbm(&self) -> f64 {
        self.p_in_max_dbm
    }

    pub fn linear_slope(&self) -> f64 {
        self.linear_slope
    }

    pub fn linear_intercept_db(&self) -> f64 {
        self.linear_intercept_db
    }

    pub fn p_out_sat_dbm(&self) -> f64 {
        self.p_out_sat_dbm
    }

    pub fn p_in_min_mw(&self) -> f64 {
        dbm_to_mw(self.p_in_min_dbm)
    }

    pub fn p_in_m_mw(&self) -> f64 {
        dbm_to_mw(self.p_in_m_dbm)
    }

    pub fn p_in_max_mw(&self) -> f64 {
        dbm_to_mw(self.p_in_max_dbm)
    }

    /// The fitted linear law, evaluated without regard to region.
    pub fn linear_law_db(&self, p_in_dbm: f64) -> f64 {
        self.linear_slope * p_in_dbm + self.linear_intercept_db
    }

    pub fn region(&self, p_in_dbm: f64) -> AmplifierRegion {
        if p_in_dbm >= self.p_in_min_dbm && p_in_dbm <= self.p_in_m_dbm {
            AmplifierRegion::Linear
        } else if p_in_dbm > self.p_in_m_dbm && p_in_dbm <= self.p_in_max_dbm {
            AmplifierRegion::Saturated
        } else {
            AmplifierRegion::ReflectOnly
        }
    }

    pub fn region_mw(&self, p_in_mw: f64) -> AmplifierRegion {
        self.region(mw_to_dbm(p_in_mw))
    }

    pub fn reflection_gain_db(&self, p_in_dbm: f64) -> f64 {
        match self.region(p_in_dbm) {
            AmplifierRegion::Linear => self.linear_law_db(p_in_dbm),
            AmplifierRegion::Saturated => self.p_out_sat_dbm - p_in_dbm,
            AmplifierRegion::ReflectOnly => 0.0,
        }
    }

    /// Linear power gain `a_l` for an incident power in mW.
    pub fn amplification_factor(&self, p_in_mw: f64) -> f64 {
        db_to_linear(self.reflection_gain_db(mw_to_dbm(p_in_mw)))
    }

    /// Largest gain the linear interval can deliver (linear scale).
    pub fn peak_linear_gain(&self) -> f64 {
        db_to_linear(self.linear_law_db(self.p_in_min_dbm).max(self.linear_law_db(self.p_in_m_dbm)))
    }

    /// Incident powers at which the gain is at least `target` (linear).
    ///
    /// The gain is unimodal on `[p_in_min, p_in_max]` (monotone linear law,
    /// then strictly decreasing), so the answer is a single interval.
    pub fn gain_window(&self, target: f64) -> GainWindow {
        if target <= 1.0 {
            return GainWindow::Any;
        }
        let g = linear_to_db(target);
        let (min, m, max) = (self.p_in_min_dbm, self.p_in_m_dbm, self.p_in_max_dbm);

        // linear region
        let (mut lo, mut hi) = if self.linear_slope == 0.0 {
            if self.linear_intercept_db >= g {
                (min, m)
            } else {
                (f64::INFINITY, f64::NEG_INFINITY)
            }
        } else if self.linear_slope < 0.0 {
            (min, m.min((g - self.linear_intercept_db) / self.linear_slope))
        } else {
            (min.max((g - self.linear_intercept_db) / self.linear_slope), m)
        };
        if lo > hi {
            lo = f64::INFINITY;
            hi = f64::NEG_INFINITY;
        }
        // saturated region
        let sat_hi = max.min(self.p_out_sat_dbm - g);
        if sat_hi > m {
            lo = lo.min(m);
            hi = hi.max(sat_hi);
        }
        if lo > hi {
            GainWindow::Empty
        } else {
            GainWindow::Interval {
                lo_mw: dbm_to_mw(lo),
                hi_mw: dbm_to_mw(hi),
            }
        }
    }
}

/// Gain in dB for an incident power in dBm.
pub fn reflection_gain_db(p_in_dbm: f64, model: &AmplifierModel) -> f64 {
    model.reflection_gain_db(p_in_dbm)
}

/// Linear gain `a_l` for an incident power in mW.
pub fn amplification_factor(p_in_mw: f64, model: &AmplifierModel) -> f64 {
    model.amplification_factor(p_in_mw)
}

/// Per-element hardware gains produced by the current transmit beams.
pub fn update_amplification(channels: &ChannelSet, w: &BeamformerState, model: &AmplifierModel) -> DVector<f64> {
    incident_power(channels, w).map(|p| model.amplification_factor(p))
}
