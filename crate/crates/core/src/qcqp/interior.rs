use nalgebra::{DMatrix, DVector};

use super::{
    add_realified, from_real, realify_matrix, to_real, ConstraintSet, QcqpOptions, QuadForm,
    QuadraticObjective, SolveStatus,
};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct BallSolution {
    pub x: DVector<C64>,
    pub status: SolveStatus,
    /// `Re{lin^H x} - x^H quad x` at `x`.
    pub objective: f64,
    /// Norm of the KKT residual of the scaled problem (objective and every
    /// constraint normalized to unit scale).
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Largest constraint violation in original units (non-positive when feasible).
    pub max_violation: f64,
}

/// Maximize `Re{lin^H x} - x^H quad x` over the intersection of the ball,
/// quadratic upper bounds and affine lower bounds in `cons`. Disk constraints
/// are not supported here.
///
/// `x0` only seeds the phase-I search; it need not be feasible.
pub fn solve_ball_quadratic(
    obj: &QuadraticObjective,
    cons: &ConstraintSet,
    x0: &DVector<C64>,
    opts: &QcqpOptions,
) -> Result<BallSolution> {
    let n = obj.dim();
    obj.validate()?;
    cons.validate(n)?;
    if cons.disk_radii2.is_some() {
        return Err(Error::Domain("ball solver does not take disk constraints".into()));
    }
    if x0.len() != n {
        return Err(Error::Dimension(format!("start point has length {}, expected {n}", x0.len())));
    }
    if cons.ball_radius2 == Some(0.0) {
        return Ok(trivial(obj, cons, DVector::zeros(n), opts));
    }
    if obj.is_zero() && cons.max_violation(x0) <= opts.feas_tol * constraint_scale(cons) {
        return Ok(trivial(obj, cons, x0.clone(), opts));
    }

    let scale = match cons.ball_radius2 {
        Some(r) => r.sqrt(),
        None if x0.norm() > 0.0 => x0.norm(),
        None => 1.0,
    };
    let prob = Scaled::new(obj, cons, scale);
    let m = prob.cons.len();
    let y0 = to_real(&(x0 / C64::from(scale)));
    let tol_gap = opts.tol * 1e-4;
    let tol_dual = opts.feas_tol * 1e-2;

    let mut iterations = 0;
    let start = if m > 0 && prob.values(&y0).max() > -1e-6 {
        let phase1 = PhaseOne { inner: &prob };
        let sigma0 = (prob.values(&y0).max() + 1.0).max(0.0);
        let mut v0 = DVector::zeros(y0.len() + 1);
        v0.rows_mut(0, y0.len()).copy_from(&y0);
        v0[y0.len()] = sigma0;
        let out = primal_dual(&phase1, v0, opts.max_iter, 1e-12, 1e-10, |v| {
            v[v.len() - 1] < -0.05
        });
        iterations += out.iterations;
        let y = out.v.rows(0, y0.len()).into_owned();
        let depth = prob.values(&y).max();
        if depth >= 0.0 {
            let x = from_real(y.as_slice(), n) * C64::from(scale);
            let status = if depth > opts.feas_tol {
                SolveStatus::Infeasible
            } else {
                SolveStatus::MaxIterations
            };
            let objective = obj.value(&x);
            return Ok(BallSolution {
                max_violation: cons.max_violation(&x),
                x,
                status,
                objective,
                kkt_residual: f64::INFINITY,
                iterations,
            });
        }
        y
    } else {
        y0
    };

    let out = primal_dual(&prob, start, opts.max_iter.saturating_sub(iterations), tol_gap, tol_dual, |_| false);
    iterations += out.iterations;
    let kkt = prob.kkt_residual(&out.v, &out.lambda);
    let status = if out.converged || (out.stalled && kkt <= 1e-6) {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIterations
    };
    let x = from_real(out.v.as_slice(), n) * C64::from(scale);
    Ok(BallSolution {
        objective: obj.value(&x),
        max_violation: cons.max_violation(&x),
        x,
        status,
        kkt_residual: kkt,
        iterations,
    })
}

fn constraint_scale(cons: &ConstraintSet) -> f64 {
    let mut s = cons.ball_radius2.unwrap_or(0.0);
    for c in &cons.quad_upper {
        s = s.max(c.bound.abs());
    }
    for c in &cons.affine_lower {
        s = s.max((c.bound - c.minorant.offset).abs());
    }
    s.max(f64::MIN_POSITIVE)
}

fn trivial(obj: &QuadraticObjective, cons: &ConstraintSet, x: DVector<C64>, opts: &QcqpOptions) -> BallSolution {
    let viol = cons.max_violation(&x);
    let status = if viol <= opts.feas_tol * constraint_scale(cons) {
        SolveStatus::Converged
    } else {
        SolveStatus::Infeasible
    };
    BallSolution {
        objective: obj.value(&x),
        max_violation: viol,
        x,
        status,
        kkt_residual: 0.0,
        iterations: 0,
    }
}

enum Con {
    Ball,
    /// `z^H form z - rhs`
    Quad { form: QuadForm, rhs: f64 },
    /// `rhs - 2 Re{g^H z}`, gradient precomputed in real coordinates.
    Affine { grad: DVector<f64>, g: DVector<C64>, rhs: f64 },
}

/// Problem in `z = x / scale` with objective and every constraint divided by
/// its natural magnitude; minimizes `-c.y + y^T q y` over real `y = [Re z; Im z]`.
struct Scaled {
    n: usize,
    c: DVector<f64>,
    q2: DMatrix<f64>,
    cons: Vec<Con>,
}

impl Scaled {
    fn new(obj: &QuadraticObjective, cons: &ConstraintSet, scale: f64) -> Self {
        let n = obj.dim();
        let s2 = scale * scale;
        let obj_scale = (scale * obj.lin.norm()).max(s2 * obj.quad.norm()).max(f64::MIN_POSITIVE);
        let c = to_real(&obj.lin) * (scale / obj_scale);
        let mut q2 = realify_matrix(&obj.quad.to_dense());
        q2 *= 2.0 * s2 / obj_scale;

        let mut list = Vec::with_capacity(cons.num_constraints());
        if cons.ball_radius2.is_some() {
            list.push(Con::Ball);
        }
        for qc in &cons.quad_upper {
            let norm = s2 * qc.form.norm();
            let k = norm.max(qc.bound.abs()).max(f64::MIN_POSITIVE);
            let factor = C64::from(s2 / k);
            let form = match &qc.form {
                QuadForm::Dense(m) => QuadForm::Dense(m * factor),
                QuadForm::Kron { blocks, inner } => QuadForm::Kron { blocks: *blocks, inner: inner * factor },
            };
            list.push(Con::Quad { form, rhs: qc.bound / k });
        }
        for ac in &cons.affine_lower {
            let rhs = ac.bound - ac.minorant.offset;
            let k = (2.0 * scale * ac.minorant.g.norm()).max(rhs.abs()).max(f64::MIN_POSITIVE);
            let g = &ac.minorant.g * C64::from(scale / k);
            list.push(Con::Affine { grad: to_real(&g) * -2.0, g, rhs: rhs / k });
        }
        Self { n, c, q2, cons: list }
    }

    fn values(&self, y: &DVector<f64>) -> DVector<f64> {
        let z = from_real(y.as_slice(), self.n);
        DVector::from_iterator(
            self.cons.len(),
            self.cons.iter().map(|c| match c {
                Con::Ball => y.norm_squared() - 1.0,
                Con::Quad { form, rhs } => form.value(&z) - rhs,
                Con::Affine { g, rhs, .. } => rhs - 2.0 * g.dotc(&z).re,
            }),
        )
    }

    fn values_and_jacobian(&self, y: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let z = from_real(y.as_slice(), self.n);
        let m = self.cons.len();
        let mut f = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, 2 * self.n);
        for (i, c) in self.cons.iter().enumerate() {
            match c {
                Con::Ball => {
                    f[i] = y.norm_squared() - 1.0;
                    jac.row_mut(i).tr_copy_from(&(y * 2.0));
                }
                Con::Quad { form, rhs } => {
                    let gz = form.apply(&z);
                    f[i] = z.dotc(&gz).re - rhs;
                    jac.row_mut(i).tr_copy_from(&(to_real(&gz) * 2.0));
                }
                Con::Affine { grad, g, rhs } => {
                    f[i] = rhs - 2.0 * g.dotc(&z).re;
                    jac.row_mut(i).tr_copy_from(grad);
                }
            }
        }
        (f, jac)
    }

    /// `sum_i lambda_i * hess(h_i)`; constant since every constraint is quadratic.
    fn constraint_hessian(&self, lambda: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut dense: Option<DMatrix<C64>> = None;
        let mut kron: Vec<(usize, DMatrix<C64>)> = Vec::new();
        let mut ball = 0.0;
        for (c, &w) in self.cons.iter().zip(lambda) {
            match c {
                Con::Ball => ball += w,
                Con::Quad { form: QuadForm::Dense(m), .. } => {
                    let acc = dense.get_or_insert_with(|| DMatrix::zeros(n, n));
                    *acc += m * C64::from(w);
                }
                Con::Quad { form: QuadForm::Kron { blocks, inner }, .. } => {
                    match kron.iter_mut().find(|(b, _)| b == blocks) {
                        Some((_, acc)) => *acc += inner * C64::from(w),
                        None => kron.push((*blocks, inner * C64::from(w))),
                    }
                }
                Con::Affine { .. } => {}
            }
        }
        let mut total = dense.unwrap_or_else(|| DMatrix::zeros(n, n));
        for (blocks, inner) in kron {
            total += QuadForm::Kron { blocks, inner }.to_dense();
        }
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        add_realified(&mut h, &total, 2.0);
        for i in 0..2 * n {
            h[(i, i)] += 2.0 * ball;
        }
        h
    }

    fn objective_grad(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.q2 * y - &self.c
    }

    fn kkt_residual(&self, y: &DVector<f64>, lambda: &DVector<f64>) -> f64 {
        let (f, jac) = self.values_and_jacobian(y);
        let dual = self.objective_grad(y) + jac.tr_mul(lambda);
        let comp: f64 = f.iter().zip(lambda.iter()).map(|(f, l)| (f * l).powi(2)).sum();
        let viol: f64 = f.iter().map(|f| f.max(0.0).powi(2)).sum();
        (dual.norm_squared() + comp + viol).sqrt()
    }
}

trait Barrier {
    fn num_cons(&self) -> usize;
    fn objective_grad(&self, v: &DVector<f64>) -> DVector<f64>;
    fn values(&self, v: &DVector<f64>) -> DVector<f64>;
    fn values_and_jacobian(&self, v: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>);
    /// Hessian of the Lagrangian.
    fn hessian(&self, lambda: &DVector<f64>) -> DMatrix<f64>;
}

impl Barrier for Scaled {
    fn num_cons(&self) -> usize {
        self.cons.len()
    }
    fn objective_grad(&self, v: &DVector<f64>) -> DVector<f64> {
        Scaled::objective_grad(self, v)
    }
    fn values(&self, v: &DVector<f64>) -> DVector<f64> {
        Scaled::values(self, v)
    }
    fn values_and_jacobian(&self, v: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        Scaled::values_and_jacobian(self, v)
    }
    fn hessian(&self, lambda: &DVector<f64>) -> DMatrix<f64> {
        self.constraint_hessian(lambda.as_slice()) + &self.q2
    }
}

/// Minimize `s` subject to `h_i(y) <= s` and `s >= -1`; variables `[y; s]`.
struct PhaseOne<'a> {
    inner: &'a Scaled,
}

impl Barrier for PhaseOne<'_> {
    fn num_cons(&self) -> usize {
        self.inner.cons.len() + 1
    }
    fn objective_grad(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(v.len());
        g[v.len() - 1] = 1.0;
        g
    }
    fn values(&self, v: &DVector<f64>) -> DVector<f64> {
        let d = v.len() - 1;
        let s = v[d];
        let f = self.inner.values(&v.rows(0, d).into_owned());
        let mut out = f.add_scalar(-s).resize_vertically(f.len() + 1, 0.0);
        out[f.len()] = -s - 1.0;
        out
    }
    fn values_and_jacobian(&self, v: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let d = v.len() - 1;
        let s = v[d];
        let (f, jac) = self.inner.values_and_jacobian(&v.rows(0, d).into_owned());
        let m = f.len();
        let mut out = f.add_scalar(-s).resize_vertically(m + 1, 0.0);
        out[m] = -s - 1.0;
        let mut j = DMatrix::zeros(m + 1, d + 1);
        j.view_mut((0, 0), (m, d)).copy_from(&jac);
        for i in 0..=m {
            j[(i, d)] = -1.0;
        }
        (out, j)
    }
    fn hessian(&self, lambda: &DVector<f64>) -> DMatrix<f64> {
        let d = 2 * self.inner.n;
        let h = self.inner.constraint_hessian(&lambda.as_slice()[..self.inner.cons.len()]);
        let mut out = DMatrix::zeros(d + 1, d + 1);
        out.view_mut((0, 0), (d, d)).copy_from(&h);
        out
    }
}

struct PdOutcome {
    v: DVector<f64>,
    lambda: DVector<f64>,
    iterations: usize,
    converged: bool,
    stalled: bool,
}

/// Primal-dual interior-point iteration from a strictly feasible `v`.
fn primal_dual<B: Barrier>(
    prob: &B,
    mut v: DVector<f64>,
    max_iter: usize,
    tol_gap: f64,
    tol_dual: f64,
    stop: impl Fn(&DVector<f64>) -> bool,
) -> PdOutcome {
    const MU: f64 = 10.0;
    const ALPHA: f64 = 0.01;
    const BETA: f64 = 0.5;

    let m = prob.num_cons();
    let (mut f, mut jac) = prob.values_and_jacobian(&v);
    let mut lambda = f.map(|fi| (-1.0 / fi).min(1e8));
    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = false;

    while iterations < max_iter {
        let gap = -f.dot(&lambda);
        let t = MU * m as f64 / gap.max(f64::MIN_POSITIVE);
        let r_dual = prob.objective_grad(&v) + jac.tr_mul(&lambda);
        let r_cent = -lambda.component_mul(&f) - DVector::from_element(m, 1.0 / t);
        if r_dual.norm() <= tol_dual && gap <= tol_gap {
            converged = true;
            break;
        }
        if stop(&v) {
            break;
        }
        iterations += 1;

        let d = lambda.zip_map(&f, |l, fi| l / -fi);
        let mut jd = jac.clone();
        for (i, mut row) in jd.row_iter_mut().enumerate() {
            row *= d[i];
        }
        let mut h = prob.hessian(&lambda) + jac.tr_mul(&jd);
        let rhs = -(&r_dual) - jac.tr_mul(&r_cent.component_div(&f));
        let dv = match solve_spd(&mut h, &rhs) {
            Some(dv) => dv,
            None => {
                stalled = true;
                break;
            }
        };
        let jdv = &jac * &dv;
        let dl = DVector::from_fn(m, |i, _| (r_cent[i] - lambda[i] * jdv[i]) / f[i]);

        let mut s: f64 = 1.0;
        for i in 0..m {
            if dl[i] < 0.0 {
                s = s.min(-lambda[i] / dl[i]);
            }
        }
        s *= 0.99;
        let mut cand = &v + &dv * s;
        let mut tries = 0;
        while prob.values(&cand).max() >= 0.0 && tries < 60 {
            s *= BETA;
            cand = &v + &dv * s;
            tries += 1;
        }
        let res0 = (r_dual.norm_squared() + r_cent.norm_squared()).sqrt();
        loop {
            let lam_c = &lambda + &dl * s;
            let (fc, jc) = prob.values_and_jacobian(&cand);
            let rd = prob.objective_grad(&cand) + jc.tr_mul(&lam_c);
            let rc = -lam_c.component_mul(&fc) - DVector::from_element(m, 1.0 / t);
            let res = (rd.norm_squared() + rc.norm_squared()).sqrt();
            if (fc.max() < 0.0 && res <= (1.0 - ALPHA * s) * res0) || s < 1e-14 {
                break;
            }
            s *= BETA;
            cand = &v + &dv * s;
        }
        if s < 1e-14 || prob.values(&cand).max() >= 0.0 {
            stalled = true;
            break;
        }
        lambda += &dl * s;
        v = cand;
        (f, jac) = prob.values_and_jacobian(&v);
    }
    PdOutcome { v, lambda, iterations, converged, stalled }
}

/// Solve `h x = rhs` for symmetric `h`: Cholesky, then regularized Cholesky, then LU.
fn solve_spd(h: &mut DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    let reg = 1e-12 * h.diagonal().amax().max(f64::MIN_POSITIVE);
    for i in 0..h.nrows() {
        h[(i, i)] += reg;
    }
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    h.clone().lu().solve(rhs)
}
