//! Large-scale path loss and small-scale fading for the BS→RIS→user links.
//!
//! The BS→RIS link is Rician with a line-of-sight term built from the 2-D
//! geometry; the RIS→user links are Rayleigh. Both are scaled by the
//! distance-dependent path loss `C0 · d^(-alpha)`.
//!
//! Array conventions: the BS is a half-wavelength ULA laid along the y-axis,
//! the RIS a half-wavelength ULA laid along the x-axis. The steering phase of
//! element `i` is `pi * i * cos(angle to the array axis)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::units::db_to_linear;
use crate::{Error, Result, C64};

pub type Point = [f64; 2];

fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Node placement for one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub bs_position: Point,
    pub ris_position: Point,
    pub user_center: Point,
    pub user_radius: f64,
    pub user_positions: Vec<Point>,
}

impl Geometry {
    /// Geometry with no users placed yet.
    pub fn new(bs_position: Point, ris_position: Point, user_center: Point, user_radius: f64) -> Self {
        Self {
            bs_position,
            ris_position,
            user_center,
            user_radius,
            user_positions: Vec::new(),
        }
    }

    /// Default deployment: BS at (0, -40), RIS at (400, 15), users within
    /// 8 m of (400, 0).
    pub fn default_layout() -> Self {
        Self::new([0.0, -40.0], [400.0, 15.0], [400.0, 0.0], 8.0)
    }

    /// Places `k` users uniformly over the disk around `user_center`.
    pub fn draw_users<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) {
        self.user_positions = (0..k)
            .map(|_| {
                let r = self.user_radius * rng.random::<f64>().sqrt();
                let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                [self.user_center[0] + r * phi.cos(), self.user_center[1] + r * phi.sin()]
            })
            .collect();
    }

    pub fn bs_ris_distance(&self) -> f64 {
        distance(self.bs_position, self.ris_position)
    }

    pub fn ris_user_distances(&self) -> Vec<f64> {
        self.user_positions
            .iter()
            .map(|&u| distance(self.ris_position, u))
            .collect()
    }

    /// Checks that every distance used downstream is strictly positive and
    /// every user sits inside the placement disk.
    pub fn validate(&self) -> Result<()> {
        if !(self.bs_ris_distance() > 0.0) {
            return Err(Error::Domain("BS and RIS are co-located".into()));
        }
        for (k, d) in self.ris_user_distances().into_iter().enumerate() {
            if !(d > 0.0) {
                return Err(Error::Domain(format!("user {k} is co-located with the RIS")));
            }
        }
        for (k, &u) in self.user_positions.iter().enumerate() {
            if distance(u, self.user_center) > self.user_radius * (1.0 + 1e-12) {
                return Err(Error::Domain(format!("user {k} lies outside the placement disk")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    /// Reference gain at 1 m, dB.
    pub c0_db: f64,
    pub alpha_bs_ris: f64,
    pub alpha_ris_user: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self {
            c0_db: -30.0,
            alpha_bs_ris: 3.2,
            alpha_ris_user: 2.7,
        }
    }
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_bs_ris >= 0.0 && self.alpha_ris_user >= 0.0) {
            return Err(Error::Domain("path-loss exponents must be non-negative".into()));
        }
        if !(db_to_linear(self.c0_db) > 0.0) {
            return Err(Error::Domain("reference gain must be positive in linear scale".into()));
        }
        Ok(())
    }
}

/// Linear power gain `10^(c0_db/10) * d^(-alpha)`.
pub fn path_loss(d: f64, alpha: f64, c0_db: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("path loss needs a positive distance, got {d}")));
    }
    Ok(db_to_linear(c0_db) * d.powf(-alpha))
}

/// Half-wavelength ULA response, `exp(j*pi*i*cos_axis)` for element `i`.
pub fn ula_steering(n: usize, cos_axis: f64) -> DVector<C64> {
    DVector::from_fn(n, |i, _| C64::from_polar(1.0, std::f64::consts::PI * i as f64 * cos_axis))
}

/// One circularly-symmetric complex Gaussian sample with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `sqrt(gain) * g` with `g` i.i.d. CN(0, 1).
pub fn rayleigh_vector<R: Rng + ?Sized>(gain: f64, len: usize, rng: &mut R) -> DVector<C64> {
    let amp = gain.sqrt();
    DVector::from_fn(len, |_, _| complex_gaussian(rng) * amp)
}

/// Rician BS→RIS matrix, `L` rows (RIS elements) by `M` columns (BS antennas).
pub fn gen_bs_ris_channel<R: Rng + ?Sized>(
    geometry: &Geometry,
    path_loss_params: &PathLossParams,
    beta: f64,
    m: usize,
    l: usize,
    rng: &mut R,
) -> Result<DMatrix<C64>> {
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("Rician factor must be non-negative, got {beta}")));
    }
    let d = geometry.bs_ris_distance();
    let pl = path_loss(d, path_loss_params.alpha_bs_ris, path_loss_params.c0_db)?;
    let dx = geometry.ris_position[0] - geometry.bs_position[0];
    let dy = geometry.ris_position[1] - geometry.bs_position[1];
    // BS axis is y, RIS axis is x; the RIS sees the BS from the opposite direction.
    let a_bs = ula_steering(m, dy / d);
    let a_ris = ula_steering(l, -dx / d);
    let los = &a_ris * a_bs.adjoint();

    let w_los = (beta / (beta + 1.0)).sqrt();
    let w_nlos = (1.0 / (beta + 1.0)).sqrt();
    let amp = pl.sqrt();
    // Column-major fill order keeps draws reproducible for a fixed seed.
    let nlos = DMatrix::from_fn(l, m, |_, _| complex_gaussian(rng));
    Ok((los * C64::from(w_los) + nlos * C64::from(w_nlos)) * C64::from(amp))
}

/// Rayleigh RIS→user vectors, one per placed user.
pub fn gen_ris_user_channels<R: Rng + ?Sized>(
    geometry: &Geometry,
    path_loss_params: &PathLossParams,
    k: usize,
    l: usize,
    rng: &mut R,
) -> Result<Vec<DVector<C64>>> {
    if k == 0 {
        return Err(Error::Domain("need at least one user".into()));
    }
    if geometry.user_positions.len() != k {
        return Err(Error::Dimension(format!(
            "{} user positions for {k} users",
            geometry.user_positions.len()
        )));
    }
    geometry
        .ris_user_distances()
        .into_iter()
        .map(|d| {
            let pl = path_loss(d, path_loss_params.alpha_ris_user, path_loss_params.c0_db)?;
            Ok(rayleigh_vector(pl, l, rng))
        })
        .collect()
}

/// Channels of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS→RIS, `L x M`; row `l` is `h_{r,l}^H`.
    pub h_bs_ris: DMatrix<C64>,
    /// RIS→user `k`, length `L`.
    pub h_ris_user: Vec<DVector<C64>>,
    pub rician_factor: f64,
}

impl ChannelSet {
    pub fn new(h_bs_ris: DMatrix<C64>, h_ris_user: Vec<DVector<C64>>, rician_factor: f64) -> Result<Self> {
        let l = h_bs_ris.nrows();
        if l == 0 || h_bs_ris.ncols() == 0 || h_ris_user.is_empty() {
            return Err(Error::Dimension("empty channel set".into()));
        }
        if let Some(k) = h_ris_user.iter().position(|g| g.len() != l) {
            return Err(Error::Dimension(format!("RIS→user channel {k} has wrong length")));
        }
        let finite = h_bs_ris.iter().chain(h_ris_user.iter().flat_map(|g| g.iter())).all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::Domain("non-finite channel entry".into()));
        }
        Ok(Self {
            h_bs_ris,
            h_ris_user,
            rician_factor,
        })
    }

    /// Draws a full realization. User positions must already be placed.
    pub fn generate<R: Rng + ?Sized>(
        geometry: &Geometry,
        path_loss_params: &PathLossParams,
        beta: f64,
        m: usize,
        l: usize,
        rng: &mut R,
    ) -> Result<Self> {
        geometry.validate()?;
        path_loss_params.validate()?;
        let h = gen_bs_ris_channel(geometry, path_loss_params, beta, m, l, rng)?;
        let g = gen_ris_user_channels(geometry, path_loss_params, geometry.user_positions.len(), l, rng)?;
        Self::new(h, g, beta)
    }

    pub fn num_antennas(&self) -> usize {
        self.h_bs_ris.ncols()
    }

    pub fn num_elements(&self) -> usize {
        self.h_bs_ris.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.h_ris_user.len()
    }
}
