//! On-disk experiment configuration (TOML).
//!
//! Every section and key is optional; omitted values take the defaults of the
//! reference deployment. Unknown keys are rejected. Powers are given in dBm.
//!
//! ```toml
//! schema_version = 1
//!
//! [system]
//! num_antennas = 4
//! num_users = 4
//! num_elements = 64
//! p_bs_dbm = 10.0
//! p_elem_dbm = 0.1
//! sigma_v2_dbm = -90.0
//! sigma2_dbm = -90.0
//!
//! [geometry]
//! bs_position = [0.0, -40.0]
//! ris_position = [400.0, 15.0]
//! user_center = [400.0, 0.0]
//! user_radius = 8.0
//!
//! [channel]
//! c0_db = -30.0
//! alpha_bs_ris = 3.2
//! alpha_ris_user = 2.7
//! rician_factor = 1.0
//!
//! [amplifier]
//! p_in_min_dbm = -100.0
//! p_in_m_dbm = 10.0
//! p_in_max_dbm = 20.0
//! linear_slope_db_per_dbm = -0.195
//! linear_intercept_db = 22.46
//!
//! [solver]
//! outer_tol = 1e-4
//! max_outer_iters = 100
//! init_strategy = "mrt_scaled"
//! reevaluate_ideal = true
//! ideal_warm_start = true
//! # ideal_gain_db = 41.96
//! beam_qcqp = { tol = 1e-7, feas_tol = 1e-8, max_iter = 5000 }
//! reflection_qcqp = { tol = 1e-7, feas_tol = 1e-6, max_iter = 500 }
//!
//! [experiment]
//! seed = 2024
//! realizations = 50
//! modes = ["practical_active", "ideal_active", "passive"]
//! power_values_dbm = [6.0, 9.0, 12.0, 15.0, 18.0, 21.0]
//! position_values_m = [350.0, 375.0, 400.0, 425.0, 450.0]
//! element_values = [16, 32, 64, 128]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::amplifier::{AmplifierModel, AmplifierParams};
use crate::channel::{Geometry, PathLossParams, Point};
use crate::qcqp::QcqpOptions;
use crate::solver::{InitStrategy, Mode, SolverOptions};
use crate::system::SystemConfig;
use crate::units::{dbm_to_mw, mw_to_dbm};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub system: SystemSection,
    pub geometry: GeometrySection,
    pub channel: ChannelSection,
    pub amplifier: AmplifierParams,
    pub solver: SolverSection,
    pub experiment: ExperimentSection,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            system: SystemSection::default(),
            geometry: GeometrySection::default(),
            channel: ChannelSection::default(),
            amplifier: AmplifierParams::default(),
            solver: SolverSection::default(),
            experiment: ExperimentSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub num_antennas: usize,
    pub num_users: usize,
    pub num_elements: usize,
    pub p_bs_dbm: f64,
    pub p_elem_dbm: f64,
    pub sigma_v2_dbm: f64,
    pub sigma2_dbm: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        let s = SystemConfig::default();
        Self {
            num_antennas: s.m,
            num_users: s.k,
            num_elements: s.l,
            p_bs_dbm: mw_to_dbm(s.p_bs),
            p_elem_dbm: mw_to_dbm(s.p_elem),
            sigma_v2_dbm: mw_to_dbm(s.sigma_v2),
            sigma2_dbm: mw_to_dbm(s.sigma2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub bs_position: Point,
    pub ris_position: Point,
    pub user_center: Point,
    pub user_radius: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = Geometry::default_layout();
        Self {
            bs_position: g.bs_position,
            ris_position: g.ris_position,
            user_center: g.user_center,
            user_radius: g.user_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub c0_db: f64,
    pub alpha_bs_ris: f64,
    pub alpha_ris_user: f64,
    pub rician_factor: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let p = PathLossParams::default();
        Self {
            c0_db: p.c0_db,
            alpha_bs_ris: p.alpha_bs_ris,
            alpha_ris_user: p.alpha_ris_user,
            rician_factor: 1.0,
        }
    }
}

/// Solver settings shared by every mode; the mode itself comes from the
/// experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub outer_tol: f64,
    pub max_outer_iters: usize,
    pub beam_qcqp: QcqpOptions,
    pub reflection_qcqp: QcqpOptions,
    pub init_strategy: InitStrategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideal_gain_db: Option<f64>,
    pub reevaluate_ideal: bool,
    pub ideal_warm_start: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            outer_tol: o.outer_tol,
            max_outer_iters: o.max_outer_iters,
            beam_qcqp: o.beam_qcqp,
            reflection_qcqp: o.reflection_qcqp,
            init_strategy: o.init_strategy,
            ideal_gain_db: o.ideal_gain_db,
            reevaluate_ideal: o.reevaluate_ideal,
            ideal_warm_start: o.ideal_warm_start,
        }
    }
}

impl SolverSection {
    pub fn options(&self, mode: Mode) -> SolverOptions {
        SolverOptions {
            mode,
            outer_tol: self.outer_tol,
            max_outer_iters: self.max_outer_iters,
            beam_qcqp: self.beam_qcqp,
            reflection_qcqp: self.reflection_qcqp,
            init_strategy: self.init_strategy,
            ideal_gain_db: self.ideal_gain_db,
            reevaluate_ideal: self.reevaluate_ideal,
            ideal_warm_start: self.ideal_warm_start,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seed: u64,
    pub realizations: usize,
    pub modes: Vec<Mode>,
    pub power_values_dbm: Vec<f64>,
    pub position_values_m: Vec<f64>,
    pub element_values: Vec<usize>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            seed: 2024,
            realizations: 50,
            modes: Mode::ALL.to_vec(),
            power_values_dbm: vec![6.0, 9.0, 12.0, 15.0, 18.0, 21.0],
            position_values_m: vec![350.0, 375.0, 400.0, 425.0, 450.0],
            element_values: vec![16, 32, 64, 128],
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.system_config()?.validate()?;
        self.geometry().validate()?;
        self.path_loss().validate()?;
        if !(self.channel.rician_factor >= 0.0 && self.channel.rician_factor.is_finite()) {
            return Err(Error::Config("rician_factor must be finite and non-negative".into()));
        }
        if !(self.geometry.user_radius >= 0.0) {
            return Err(Error::Config("user_radius must be non-negative".into()));
        }
        self.solver.options(Mode::PracticalActive).validate()?;
        if self.experiment.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if self.experiment.modes.is_empty() {
            return Err(Error::Config("at least one mode is required".into()));
        }
        Ok(())
    }

    pub fn system_config(&self) -> Result<SystemConfig> {
        let s = &self.system;
        Ok(SystemConfig {
            m: s.num_antennas,
            k: s.num_users,
            l: s.num_elements,
            p_bs: dbm_to_mw(s.p_bs_dbm),
            p_elem: dbm_to_mw(s.p_elem_dbm),
            sigma_v2: dbm_to_mw(s.sigma_v2_dbm),
            sigma2: dbm_to_mw(s.sigma2_dbm),
            amplifier: AmplifierModel::try_from(self.amplifier)?,
        })
    }

    pub fn geometry(&self) -> Geometry {
        let g = &self.geometry;
        Geometry::new(g.bs_position, g.ris_position, g.user_center, g.user_radius)
    }

    pub fn path_loss(&self) -> PathLossParams {
        PathLossParams {
            c0_db: self.channel.c0_db,
            alpha_bs_ris: self.channel.alpha_bs_ris,
            alpha_ris_user: self.channel.alpha_ris_user,
        }
    }

    /// Experiment sweeping `variable` over the matching value list.
    pub fn experiment(&self, variable: SweepVariable) -> Result<ExperimentConfig> {
        let values = match variable {
            SweepVariable::PBsDbm => self.experiment.power_values_dbm.clone(),
            SweepVariable::UserCenterXM => self.experiment.position_values_m.clone(),
            SweepVariable::NumElements => self.experiment.element_values.iter().map(|&l| l as f64).collect(),
        };
        Ok(ExperimentConfig {
            system: self.system_config()?,
            geometry: self.geometry(),
            path_loss: self.path_loss(),
            rician_factor: self.channel.rician_factor,
            solver: self.solver,
            sweep_variable: variable,
            sweep_values: values,
            realizations: self.experiment.realizations,
            seed: self.experiment.seed,
            modes: self.experiment.modes.clone(),
            output: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "p_bs_dbm")]
    PBsDbm,
    #[serde(rename = "user_center_x_m")]
    UserCenterXM,
    #[serde(rename = "num_elements")]
    NumElements,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::PBsDbm => "p_bs_dbm",
            SweepVariable::UserCenterXM => "user_center_x_m",
            SweepVariable::NumElements => "num_elements",
        }
    }
}

/// Everything one sweep needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub geometry: Geometry,
    pub path_loss: PathLossParams,
    pub rician_factor: f64,
    pub solver: SolverSection,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub modes: Vec<Mode>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ConfigFile::default()
            .experiment(SweepVariable::PBsDbm)
            .expect("default configuration is valid")
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.solver.options(Mode::PracticalActive).validate()?;
        if self.sweep_values.is_empty() {
            return Err(Error::Config("sweep values must not be empty".into()));
        }
        if self.sweep_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        let up = self.sweep_values.windows(2).all(|w| w[1] > w[0]);
        let down = self.sweep_values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config("sweep values must be strictly monotone".into()));
        }
        if self.sweep_variable == SweepVariable::NumElements
            && self.sweep_values.iter().any(|v| *v < 1.0 || v.fract() != 0.0)
        {
            return Err(Error::Config("element counts must be positive integers".into()));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("at least one mode is required".into()));
        }
        Ok(())
    }

    /// System and geometry at one sweep point (users not yet placed).
    pub fn point(&self, value: f64) -> (SystemConfig, Geometry) {
        let mut system = self.system;
        let mut geometry = self.geometry.clone();
        match self.sweep_variable {
            SweepVariable::PBsDbm => system.p_bs = dbm_to_mw(value),
            SweepVariable::UserCenterXM => geometry.user_center[0] = value,
            SweepVariable::NumElements => system.l = value as usize,
        }
        (system, geometry)
    }
}
