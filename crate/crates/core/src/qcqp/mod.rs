//! Convex kernels for the two subproblem shapes of the alternating optimizer.
//!
//! Both maximize a concave complex quadratic
//!
//! ```text
//!     Re{lin^H x} - x^H quad x
//! ```
//!
//! - [`solve_ball_quadratic`]: subject to an optional ball, convex quadratic
//!   upper bounds `x^H G x <= b` and affine lower bounds
//!   `2 Re{g^H x} + offset >= b` (the MM minorants produced by
//!   [`mm_linearize`]). Primal-dual interior point on the realified problem.
//! - [`solve_disk_quadratic`]: subject to per-coordinate disks `|x_l|^2 <= r_l`.
//!   Exact cyclic coordinate ascent.

mod disk;
mod interior;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use disk::{solve_disk_quadratic, solve_unit_modulus_quadratic, DiskSolution};
pub use interior::{solve_ball_quadratic, BallSolution};

use crate::{Error, Result, C64};

/// Hermitian PSD quadratic form, stored densely or as `I_blocks ⊗ inner`.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadForm {
    Dense(DMatrix<C64>),
    Kron { blocks: usize, inner: DMatrix<C64> },
}

impl QuadForm {
    pub fn zeros(n: usize) -> Self {
        QuadForm::Dense(DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        match self {
            QuadForm::Dense(m) => m.nrows(),
            QuadForm::Kron { blocks, inner } => blocks * inner.nrows(),
        }
    }

    /// `G x`.
    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        match self {
            QuadForm::Dense(m) => m * x,
            QuadForm::Kron { blocks, inner } => {
                let b = inner.nrows();
                let mut out = DVector::zeros(x.len());
                for j in 0..*blocks {
                    let seg = inner * x.rows(j * b, b);
                    out.rows_mut(j * b, b).copy_from(&seg);
                }
                out
            }
        }
    }

    /// `Re{x^H G x}`.
    pub fn value(&self, x: &DVector<C64>) -> f64 {
        x.dotc(&self.apply(x)).re
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match self {
            QuadForm::Dense(m) => m.clone(),
            QuadForm::Kron { blocks, inner } => {
                let b = inner.nrows();
                let mut out = DMatrix::zeros(blocks * b, blocks * b);
                for j in 0..*blocks {
                    out.view_mut((j * b, j * b), (b, b)).copy_from(inner);
                }
                out
            }
        }
    }

    /// Frobenius norm of the full (lifted) matrix.
    pub fn norm(&self) -> f64 {
        match self {
            QuadForm::Dense(m) => m.norm(),
            QuadForm::Kron { blocks, inner } => inner.norm() * (*blocks as f64).sqrt(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            QuadForm::Dense(m) => m.iter().all(|z| *z == C64::new(0.0, 0.0)),
            QuadForm::Kron { inner, .. } => inner.iter().all(|z| *z == C64::new(0.0, 0.0)),
        }
    }

    fn core(&self) -> &DMatrix<C64> {
        match self {
            QuadForm::Dense(m) => m,
            QuadForm::Kron { inner, .. } => inner,
        }
    }

    /// Hermitian within `1e-12` and PSD within `1e-10`, both relative to the
    /// matrix norm.
    pub fn check_psd(&self) -> Result<()> {
        let m = self.core();
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension("quadratic form is not square".into()));
        }
        let scale = m.norm();
        if scale == 0.0 {
            return Ok(());
        }
        let asym = (m - m.adjoint()).norm();
        if asym > 1e-12 * scale {
            return Err(Error::Domain(format!("quadratic form is not Hermitian (|Q - Q^H| = {asym:e})")));
        }
        // Complex Cholesky happily takes square roots of negative pivots, so
        // test the real symmetric embedding instead.
        let herm = realify_matrix(&((m + m.adjoint()) * C64::from(0.5)));
        let shift = DMatrix::<f64>::identity(herm.nrows(), herm.nrows()) * (1e-10 * scale);
        if (&herm + shift).cholesky().is_some() {
            return Ok(());
        }
        let min_eigenvalue = herm.symmetric_eigenvalues().min() / scale;
        if min_eigenvalue >= -1e-10 {
            Ok(())
        } else {
            Err(Error::NotPsd { min_eigenvalue })
        }
    }
}

/// Objective `Re{lin^H x} - x^H quad x` (to be maximized).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    pub lin: DVector<C64>,
    pub quad: QuadForm,
}

impl QuadraticObjective {
    pub fn value(&self, x: &DVector<C64>) -> f64 {
        self.lin.dotc(x).re - self.quad.value(x)
    }

    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    pub fn is_zero(&self) -> bool {
        self.lin.iter().all(|z| *z == C64::new(0.0, 0.0)) && self.quad.is_zero()
    }

    pub fn validate(&self) -> Result<()> {
        if self.quad.dim() != self.lin.len() {
            return Err(Error::Dimension(format!(
                "objective has linear part of length {} and quadratic part of size {}",
                self.lin.len(),
                self.quad.dim()
            )));
        }
        self.quad.check_psd()
    }
}

/// `l(x) = 2 Re{g^H x} + offset`, an affine minorant of a convex quadratic.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMinorant {
    pub g: DVector<C64>,
    pub offset: f64,
}

impl AffineMinorant {
    pub fn value(&self, x: &DVector<C64>) -> f64 {
        2.0 * self.g.dotc(x).re + self.offset
    }
}

/// First-order minorant of `x^H G x` at `anchor`:
/// `2 Re{anchor^H G x} - anchor^H G anchor`.
///
/// Tight at the anchor; the gap at any `x` is `(x - anchor)^H G (x - anchor)`.
pub fn mm_linearize(form: &QuadForm, anchor: &DVector<C64>) -> AffineMinorant {
    let g = form.apply(anchor);
    let offset = -anchor.dotc(&g).re;
    AffineMinorant { g, offset }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadUpper {
    pub form: QuadForm,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineLower {
    pub minorant: AffineMinorant,
    pub bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    /// `||x||^2 <= ball_radius2`.
    pub ball_radius2: Option<f64>,
    pub quad_upper: Vec<QuadUpper>,
    pub affine_lower: Vec<AffineLower>,
    /// `|x_l|^2 <= disk_radii2[l]`.
    pub disk_radii2: Option<Vec<f64>>,
}

impl ConstraintSet {
    pub fn num_constraints(&self) -> usize {
        self.ball_radius2.is_some() as usize
            + self.quad_upper.len()
            + self.affine_lower.len()
            + self.disk_radii2.as_ref().map_or(0, Vec::len)
    }

    /// Largest absolute violation at `x`, in each constraint's own units.
    pub fn max_violation(&self, x: &DVector<C64>) -> f64 {
        let mut worst = 0.0f64;
        if let Some(r) = self.ball_radius2 {
            worst = worst.max(x.norm_squared() - r);
        }
        for c in &self.quad_upper {
            worst = worst.max(c.form.value(x) - c.bound);
        }
        for c in &self.affine_lower {
            worst = worst.max(c.bound - c.minorant.value(x));
        }
        if let Some(r) = &self.disk_radii2 {
            for (z, r) in x.iter().zip(r) {
                worst = worst.max(z.norm_sqr() - r);
            }
        }
        worst
    }

    /// Largest violation with each constraint divided by the magnitude of the
    /// two sides it compares.
    pub fn max_relative_violation(&self, x: &DVector<C64>) -> f64 {
        let rel = |lhs: f64, rhs: f64| (lhs - rhs) / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        let mut worst = f64::NEG_INFINITY;
        if let Some(r) = self.ball_radius2 {
            worst = worst.max(rel(x.norm_squared(), r));
        }
        for c in &self.quad_upper {
            worst = worst.max(rel(c.form.value(x), c.bound));
        }
        for c in &self.affine_lower {
            worst = worst.max(rel(c.bound, c.minorant.value(x)));
        }
        if let Some(r) = &self.disk_radii2 {
            for (z, r) in x.iter().zip(r) {
                worst = worst.max(rel(z.norm_sqr(), *r));
            }
        }
        worst
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let finite = self.ball_radius2.iter().all(|r| r.is_finite() && *r >= 0.0)
            && self.quad_upper.iter().all(|c| c.bound.is_finite())
            && self.affine_lower.iter().all(|c| c.bound.is_finite() && c.minorant.offset.is_finite())
            && self.disk_radii2.iter().flatten().all(|r| r.is_finite() && *r >= 0.0);
        if !finite {
            return Err(Error::Domain("constraint bounds must be finite (radii non-negative)".into()));
        }
        for c in &self.quad_upper {
            if c.form.dim() != n {
                return Err(Error::Dimension("quadratic constraint has wrong size".into()));
            }
            c.form.check_psd()?;
        }
        if self.affine_lower.iter().any(|c| c.minorant.g.len() != n) {
            return Err(Error::Dimension("affine constraint has wrong size".into()));
        }
        if self.disk_radii2.as_ref().is_some_and(|r| r.len() != n) {
            return Err(Error::Dimension("disk radii have wrong length".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QcqpOptions {
    /// Objective tolerance, relative to the problem's natural scale.
    pub tol: f64,
    /// Feasibility tolerance, relative to each constraint's scale.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for QcqpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            feas_tol: 1e-8,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Infeasible,
}

/// `[Re x; Im x]`.
pub(crate) fn to_real(x: &DVector<C64>) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(2 * n, |i, _| if i < n { x[i].re } else { x[i - n].im })
}

pub(crate) fn from_real(y: &[f64], n: usize) -> DVector<C64> {
    DVector::from_fn(n, |i, _| C64::new(y[i], y[n + i]))
}

/// Real symmetric `2n x 2n` matrix with `x^H Q x = y^T Q_r y` for `y = [Re x; Im x]`.
pub(crate) fn realify_matrix(q: &DMatrix<C64>) -> DMatrix<f64> {
    let n = q.nrows();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    add_realified(&mut r, q, 1.0);
    r
}

/// `out += weight * realify(q)` for Hermitian `q`.
pub(crate) fn add_realified(out: &mut DMatrix<f64>, q: &DMatrix<C64>, weight: f64) {
    let n = q.nrows();
    for j in 0..n {
        for i in 0..n {
            let z = q[(i, j)] * weight;
            out[(i, j)] += z.re;
            out[(n + i, n + j)] += z.re;
            out[(i, n + j)] -= z.im;
            out[(n + i, j)] += z.im;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_psd(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let f = DMatrix::from_fn(n, rank, |_, _| complex_gaussian(rng));
        &f * f.adjoint()
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<C64> {
        DVector::from_fn(n, |_, _| complex_gaussian(rng))
    }

    #[test]
    fn minorant_is_tight_and_below() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let g = QuadForm::Dense(random_psd(4, 2, &mut rng));
            let anchor = random_vec(4, &mut rng);
            let lin = mm_linearize(&g, &anchor);
            let at = g.value(&anchor);
            assert!((lin.value(&anchor) - at).abs() <= 1e-12 * at.abs().max(1.0));
            for _ in 0..50 {
                let x = random_vec(4, &mut rng);
                let gap = g.value(&x) - lin.value(&x);
                let d = &x - &anchor;
                assert!(gap >= -1e-10);
                assert!((gap - g.value(&d)).abs() <= 1e-9 * gap.abs().max(1.0));
            }
        }
    }

    #[test]
    fn minorant_of_zero_form_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lin = mm_linearize(&QuadForm::zeros(3), &random_vec(3, &mut rng));
        assert_eq!(lin.value(&random_vec(3, &mut rng)), 0.0);
    }

    #[test]
    fn kron_form_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let inner = random_psd(3, 1, &mut rng);
        let k = QuadForm::Kron { blocks: 4, inner };
        let d = QuadForm::Dense(k.to_dense());
        let x = random_vec(12, &mut rng);
        assert!((k.apply(&x) - d.apply(&x)).norm() < 1e-12);
        assert!((k.norm() - d.norm()).abs() < 1e-12);
    }

    #[test]
    fn realify_preserves_quadratic_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_psd(3, 3, &mut rng);
        let x = random_vec(3, &mut rng);
        let y = to_real(&x);
        let lhs = x.dotc(&(&q * &x)).re;
        let rhs = y.dot(&(realify_matrix(&q) * &y));
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs());
        assert_eq!(from_real(y.as_slice(), 3), x);
    }

    #[test]
    fn psd_check_rejects_indefinite() {
        let mut q = DMatrix::<C64>::identity(2, 2);
        q[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(matches!(QuadForm::Dense(q).check_psd(), Err(Error::NotPsd { .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        QuadForm::Dense(random_psd(5, 1, &mut rng)).check_psd().unwrap();
    }
}
