use nalgebra::DVector;

use super::{QcqpOptions, QuadraticObjective, SolveStatus};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct DiskSolution {
    pub x: DVector<C64>,
    pub status: SolveStatus,
    pub objective: f64,
    /// Scaled KKT residual: stationarity with the disk multipliers plus
    /// complementarity, with the objective at unit scale.
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Objective after projecting `x0` and after every sweep; non-decreasing.
    pub history: Vec<f64>,
}

/// Maximize `Re{lin^H x} - x^H quad x` subject to `|x_l|^2 <= radii2[l]` by
/// cyclic exact coordinate maximization. `x0` is projected onto the disks first.
pub fn solve_disk_quadratic(
    obj: &QuadraticObjective,
    radii2: &[f64],
    x0: &DVector<C64>,
    opts: &QcqpOptions,
) -> Result<DiskSolution> {
    let n = obj.dim();
    obj.validate()?;
    check_inputs(n, radii2, x0)?;
    let q = obj.quad.to_dense();
    let radii: Vec<f64> = radii2.iter().map(|r| r.sqrt()).collect();
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let scale = (rmax * obj.lin.norm()).max(rmax * rmax * q.norm()).max(f64::MIN_POSITIVE);

    let mut x = DVector::from_fn(n, |l, _| project(x0[l], radii[l]));
    let mut y = &q * &x;
    let mut history = vec![value(obj, &x, &y)];
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut kkt = kkt_residual(obj, &x, &y, &radii, scale);

    while iterations < opts.max_iter {
        if kkt <= opts.feas_tol {
            status = SolveStatus::Converged;
            break;
        }
        iterations += 1;
        for l in 0..n {
            let cand = coordinate_max(obj.lin[l], q[(l, l)].re, y[l], x[l], radii[l]);
            let delta = cand - x[l];
            if delta != C64::new(0.0, 0.0) {
                y.axpy(delta, &q.column(l), C64::new(1.0, 0.0));
                x[l] = cand;
            }
        }
        // Refresh to stop drift in the running product.
        if iterations % 50 == 0 {
            y = &q * &x;
        }
        let f = value(obj, &x, &y);
        let prev = *history.last().expect("history starts non-empty");
        history.push(f);
        kkt = kkt_residual(obj, &x, &y, &radii, scale);
        if (f - prev) <= opts.tol * 1e-9 * scale && kkt <= 1e-6 {
            status = SolveStatus::Converged;
            break;
        }
    }
    Ok(DiskSolution {
        objective: obj.value(&x),
        x,
        status,
        kkt_residual: kkt,
        iterations,
        history,
    })
}

/// Coordinate ascent restricted to `|x_l| = 1`; each coordinate takes the phase
/// of its partial gradient. Returns the point after `sweeps` sweeps or once the
/// objective stops improving.
pub fn solve_unit_modulus_quadratic(
    obj: &QuadraticObjective,
    x0: &DVector<C64>,
    sweeps: usize,
) -> Result<DVector<C64>> {
    let n = obj.dim();
    if x0.len() != n || obj.quad.dim() != n {
        return Err(Error::Dimension("unit-modulus ascent: size mismatch".into()));
    }
    let q = obj.quad.to_dense();
    let mut x = DVector::from_fn(n, |l, _| unit_phase(x0[l], C64::new(1.0, 0.0)));
    let mut y = &q * &x;
    let mut f = value(obj, &x, &y);
    for _ in 0..sweeps {
        for l in 0..n {
            let b = obj.lin[l] - (y[l] - q[(l, l)] * x[l]) * 2.0;
            let cand = unit_phase(b, x[l]);
            let delta = cand - x[l];
            if delta != C64::new(0.0, 0.0) {
                y.axpy(delta, &q.column(l), C64::new(1.0, 0.0));
                x[l] = cand;
            }
        }
        let next = value(obj, &x, &y);
        if next - f <= 1e-12 * next.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        f = next;
    }
    Ok(x)
}

fn check_inputs(n: usize, radii2: &[f64], x0: &DVector<C64>) -> Result<()> {
    if radii2.len() != n || x0.len() != n {
        return Err(Error::Dimension(format!(
            "disk solver: objective size {n}, {} radii, start of length {}",
            radii2.len(),
            x0.len()
        )));
    }
    if radii2.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::Domain("disk radii must be finite and non-negative".into()));
    }
    Ok(())
}

fn project(z: C64, radius: f64) -> C64 {
    let r = z.norm();
    if r > radius {
        z * (radius / r)
    } else {
        z
    }
}

fn unit_phase(z: C64, fallback: C64) -> C64 {
    let r = z.norm();
    if r > 0.0 {
        z / r
    } else if fallback.norm() > 0.0 {
        fallback / fallback.norm()
    } else {
        C64::new(1.0, 0.0)
    }
}

/// Exact maximizer of `Re{conj(x_l) b} - d |x_l|^2` on the disk, with
/// `b = lin_l - 2 sum_{j != l} Q_lj x_j`.
fn coordinate_max(lin: C64, d: f64, y_l: C64, x_l: C64, radius: f64) -> C64 {
    if radius == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let b = lin - (y_l - x_l * d) * 2.0;
    if d > 0.0 {
        project(b / (2.0 * d), radius)
    } else if b.norm() > 0.0 {
        b * (radius / b.norm())
    } else {
        x_l
    }
}

fn value(obj: &QuadraticObjective, x: &DVector<C64>, y: &DVector<C64>) -> f64 {
    obj.lin.dotc(x).re - x.dotc(y).re
}

/// Stationarity `lin - 2 Q x = 2 nu_l x_l` with `nu_l >= 0`; multipliers are
/// fitted per coordinate and the residual taken on the scaled objective.
fn kkt_residual(
    obj: &QuadraticObjective,
    x: &DVector<C64>,
    y: &DVector<C64>,
    radii: &[f64],
    scale: f64,
) -> f64 {
    let rmax = radii.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    for l in 0..x.len() {
        if radii[l] == 0.0 {
            continue;
        }
        // Gradient of the maximization objective in the coordinate, scaled so
        // that it is dimensionless per unit radius.
        let grad = (obj.lin[l] - y[l] * 2.0) * (rmax / scale);
        let xl = x[l] / radii[l];
        let on_boundary = xl.norm() >= 1.0 - 1e-9;
        let r2 = if on_boundary {
            // grad = 2 nu x with nu >= 0: the radial part must be non-negative
            // and the tangential part zero.
            let radial = (grad * xl.conj()).re / xl.norm();
            let tangential = (grad * xl.conj()).im / xl.norm();
            tangential.powi(2) + radial.min(0.0).powi(2)
        } else {
            grad.norm_sqr()
        };
        total += r2;
    }
    total.sqrt()
}
