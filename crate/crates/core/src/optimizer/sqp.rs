//! Dense SQP for small box-constrained NLPs with many inequality rows.
//!
//! Each major iteration linearizes the constraints around the iterate and
//! solves an elastic QP
//!
//! ```text
//! min  1/2 d'Bd + g'd + M t + eps/2 t^2
//! s.t. c + J d <= t,  t >= 0,  lb - x <= d <= ub - x
//! ```
//!
//! so the subproblem is always feasible, even from an infeasible start. The
//! step is globalized with an l1 exact-penalty merit function and Armijo
//! backtracking (with one second-order correction against the Maratos
//! effect), and `B` is a Powell-damped BFGS approximation of the Lagrangian
//! Hessian. Derivatives come from central finite differences.

use nalgebra::{DMatrix, DVector};

/// Problem interface: minimize `f(x)` subject to `c(x) <= 0` and box bounds.
pub trait Nlp {
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    /// Objective and constraint rows at `x`.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqpOptions {
    pub max_iter: usize,
    /// Infinity norm of the Lagrangian gradient, relative to `max(1, |f|)`.
    pub tol_stationarity: f64,
    /// Largest allowed constraint row value.
    pub tol_feasibility: f64,
    /// Relative central-difference step.
    pub fd_step: f64,
    /// Linear penalty on the elastic slack.
    pub elastic_penalty: f64,
}

impl Default for SqpOptions {
    fn default() -> Self {
        SqpOptions {
            max_iter: 200,
            tol_stationarity: 1e-6,
            tol_feasibility: 1e-6,
            fd_step: 1e-6,
            elastic_penalty: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqpStatus {
    Converged,
    MaxIterations,
    /// Stationary for the constraint violation but not feasible.
    LocallyInfeasible,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct SqpResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub constraints: Vec<f64>,
    /// Multipliers of the constraint rows.
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    pub status: SqpStatus,
    pub stationarity: f64,
    pub violation: f64,
}

impl SqpResult {
    pub fn converged(&self) -> bool {
        self.status == SqpStatus::Converged
    }
}

/// Point with its function values and finite-difference derivatives.
struct Linearization {
    x: DVector<f64>,
    f: f64,
    c: DVector<f64>,
    grad: DVector<f64>,
    jac: DMatrix<f64>,
}

/// Central-difference step for coordinate value `v`.
pub fn fd_step(v: f64, rel: f64) -> f64 {
    rel * v.abs().max(1.0)
}

/// Objective gradient and constraint Jacobian by central differences.
pub fn finite_differences<P: Nlp + ?Sized>(nlp: &P, x: &[f64], rel: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = x.len();
    let mut grad = vec![0.0; n];
    let mut jac_cols = Vec::with_capacity(n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = fd_step(x[j], rel);
        xp[j] = x[j] + h;
        let (fp, cp) = nlp.eval(&xp);
        xp[j] = x[j] - h;
        let (fm, cm) = nlp.eval(&xp);
        xp[j] = x[j];
        grad[j] = (fp - fm) / (2.0 * h);
        jac_cols.push(cp.iter().zip(&cm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    (grad, jac_cols)
}

fn linearize<P: Nlp + ?Sized>(nlp: &P, x: DVector<f64>, f: f64, c: Vec<f64>, rel: f64) -> Linearization {
    let (grad, cols) = finite_differences(nlp, x.as_slice(), rel);
    let m = c.len();
    let jac = DMatrix::from_fn(m, x.len(), |i, j| cols[j][i]);
    Linearization { x, f, c: DVector::from_vec(c), grad: DVector::from_vec(grad), jac }
}

fn violation(c: &DVector<f64>) -> f64 {
    c.iter().fold(0.0f64, |acc, &v| acc.max(v))
}

fn l1_violation(c: &[f64]) -> f64 {
    c.iter().map(|v| v.max(0.0)).sum()
}

struct QpStep {
    d: DVector<f64>,
    slack: f64,
    /// Multipliers of the linearized constraint rows.
    lambda: DVector<f64>,
    /// Net box multipliers (upper minus lower) per coordinate.
    box_mult: DVector<f64>,
}

/// Elastic QP around `lin`; `shift` replaces `c` in the linearized rows
/// (used for the second-order correction).
fn solve_qp(
    lin: &Linearization,
    hess: &DMatrix<f64>,
    lower: &[f64],
    upper: &[f64],
    shift: Option<&DVector<f64>>,
    penalty: f64,
) -> Option<QpStep> {
    let n = lin.x.len();
    let m = lin.c.len();
    let nv = n + 1;
    let elastic_curv = 1e-6;

    let mut q = vec![0.0; nv * nv];
    for i in 0..n {
        for j in 0..n {
            q[i * nv + j] = hess[(i, j)];
        }
    }
    q[n * nv + n] = elastic_curv;
    let mut cvec: Vec<f64> = lin.grad.iter().copied().collect();
    cvec.push(penalty);

    let rows = m + 1 + 2 * n;
    let mut a = vec![0.0; rows * nv];
    let mut b = vec![0.0; rows];
    let rhs_c = shift.unwrap_or(&lin.c);
    for i in 0..m {
        for j in 0..n {
            a[i * nv + j] = lin.jac[(i, j)];
        }
        a[i * nv + n] = -1.0;
        b[i] = -rhs_c[i];
    }
    a[m * nv + n] = -1.0;
    b[m] = 0.0;
    for j in 0..n {
        let up = m + 1 + 2 * j;
        a[up * nv + j] = 1.0;
        b[up] = upper[j] - lin.x[j];
        a[(up + 1) * nv + j] = -1.0;
        b[up + 1] = lin.x[j] - lower[j];
    }

    let sol = quadprog::solve_qp(&mut q, &cvec, &a, &b, 0, false).ok()?;
    if sol.sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let d = DVector::from_iterator(n, sol.sol[..n].iter().copied());
    let lambda = DVector::from_iterator(m, sol.lagr[..m].iter().copied());
    let box_mult = DVector::from_fn(n, |j, _| sol.lagr[m + 1 + 2 * j] - sol.lagr[m + 2 + 2 * j]);
    Some(QpStep { d, slack: sol.sol[n].max(0.0), lambda, box_mult })
}

fn lagrangian_grad(lin: &Linearization, lambda: &DVector<f64>) -> DVector<f64> {
    &lin.grad + lin.jac.tr_mul(lambda)
}

fn project(x: &mut DVector<f64>, lower: &[f64], upper: &[f64]) {
    for (j, v) in x.iter_mut().enumerate() {
        *v = v.clamp(lower[j], upper[j]);
    }
}

/// Runs SQP from `x0` (projected onto the box first).
pub fn minimize<P: Nlp + ?Sized>(nlp: &P, x0: &[f64], opts: &SqpOptions) -> SqpResult {
    let lower = nlp.lower().to_vec();
    let upper = nlp.upper().to_vec();
    let n = x0.len();

    let mut x = DVector::from_column_slice(x0);
    project(&mut x, &lower, &upper);
    let (f0, c0) = nlp.eval(x.as_slice());
    let mut lin = linearize(nlp, x, f0, c0, opts.fd_step);
    let mut hess = DMatrix::<f64>::identity(n, n);
    let mut merit_weight = 1.0f64;
    let mut last_lambda = DVector::zeros(lin.c.len());
    let mut status = SqpStatus::MaxIterations;
    let mut stationarity = f64::INFINITY;
    let mut iterations = 0;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let step = match solve_qp(&lin, &hess, &lower, &upper, None, opts.elastic_penalty) {
            Some(step) => step,
            None => {
                // B lost definiteness numerically; restart from identity once
                hess = DMatrix::identity(n, n);
                match solve_qp(&lin, &hess, &lower, &upper, None, opts.elastic_penalty) {
                    Some(step) => step,
                    None => {
                        status = SqpStatus::LineSearchFailed;
                        break;
                    }
                }
            }
        };
        last_lambda = step.lambda.clone();

        let viol = violation(&lin.c);
        let residual = lagrangian_grad(&lin, &step.lambda) + &step.box_mult;
        stationarity = residual.amax() / lin.f.abs().max(1.0);
        let complementarity = step
            .lambda
            .iter()
            .zip(lin.c.iter())
            .map(|(l, c)| (l * c.min(0.0)).abs())
            .fold(0.0f64, f64::max);
        if viol <= opts.tol_feasibility
            && stationarity <= opts.tol_stationarity
            && complementarity <= opts.tol_stationarity
        {
            status = SqpStatus::Converged;
            break;
        }
        if iter == opts.max_iter {
            break;
        }
        let step_norm = step.d.amax();
        if step_norm < 1e-14 {
            status = if viol > opts.tol_feasibility {
                SqpStatus::LocallyInfeasible
            } else if stationarity <= 1e3 * opts.tol_stationarity {
                // FD noise floor; accept
                SqpStatus::Converged
            } else {
                SqpStatus::LineSearchFailed
            };
            break;
        }
        if step.slack > opts.tol_feasibility && step_norm < 1e-10 {
            status = SqpStatus::LocallyInfeasible;
            break;
        }

        merit_weight = merit_weight.max(2.0 * step.lambda.amax() + 1e-3);
        let merit = |f: f64, c: &[f64]| f + merit_weight * l1_violation(c);
        let merit0 = merit(lin.f, lin.c.as_slice());
        let predicted_c = &lin.c + &lin.jac * &step.d;
        let slope = lin.grad.dot(&step.d)
            + merit_weight * (l1_violation(predicted_c.as_slice()) - l1_violation(lin.c.as_slice()));
        let slope = slope.min(-1e-16);

        let mut accepted = None;
        let mut alpha = 1.0;
        for attempt in 0..40 {
            let mut trial = &lin.x + &step.d * alpha;
            project(&mut trial, &lower, &upper);
            let (ft, ct) = nlp.eval(trial.as_slice());
            if merit(ft, &ct) <= merit0 + 1e-4 * alpha * slope {
                accepted = Some((trial, ft, ct));
                break;
            }
            if attempt == 0 {
                // second-order correction: re-solve with constraint values at x + d
                let corr_shift = DVector::from_vec(ct.clone()) - &lin.jac * &step.d;
                if let Some(soc) = solve_qp(&lin, &hess, &lower, &upper, Some(&corr_shift), opts.elastic_penalty) {
                    let mut trial = &lin.x + &soc.d;
                    project(&mut trial, &lower, &upper);
                    let (fs, cs) = nlp.eval(trial.as_slice());
                    if merit(fs, &cs) <= merit0 + 1e-4 * slope {
                        accepted = Some((trial, fs, cs));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new, c_new)) = accepted else {
            status = if viol <= opts.tol_feasibility && stationarity <= 1e3 * opts.tol_stationarity {
                SqpStatus::Converged
            } else {
                SqpStatus::LineSearchFailed
            };
            break;
        };

        let new_lin = linearize(nlp, x_new, f_new, c_new, opts.fd_step);
        let s = &new_lin.x - &lin.x;
        let y = lagrangian_grad(&new_lin, &step.lambda) - lagrangian_grad(&lin, &step.lambda);
        damped_bfgs(&mut hess, &s, &y);
        lin = new_lin;
    }

    SqpResult {
        violation: violation(&lin.c).max(0.0),
        x: lin.x.iter().copied().collect(),
        objective: lin.f,
        constraints: lin.c.iter().copied().collect(),
        multipliers: last_lambda.iter().copied().collect(),
        iterations,
        status,
        stationarity,
    }
}

/// Powell-damped BFGS update keeping `hess` positive definite.
fn damped_bfgs(hess: &mut DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>) {
    let bs = &*hess * s;
    let sbs = s.dot(&bs);
    if sbs <= 1e-300 {
        return;
    }
    let sy = s.dot(y);
    let r = if sy >= 0.2 * sbs {
        y.clone()
    } else {
        let theta = 0.8 * sbs / (sbs - sy);
        y * theta + &bs * (1.0 - theta)
    };
    let sr = s.dot(&r);
    if sr <= 1e-300 {
        return;
    }
    *hess += &r * r.transpose() / sr - &bs * bs.transpose() / sbs;
    // keep exact symmetry
    let sym = (&*hess + hess.transpose()) * 0.5;
    *hess = sym;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Quadratic;
    impl Nlp for Quadratic {
        fn lower(&self) -> &[f64] {
            &[-10.0, -10.0]
        }
        fn upper(&self) -> &[f64] {
            &[10.0, 10.0]
        }
        // min (x-2)^2 + (y-1)^2  s.t. x + y <= 1
        fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
            ((x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2), vec![x[0] + x[1] - 1.0])
        }
    }

    #[test]
    fn quadprog_sign_convention() {
        // min 1/2 x^2 + x  s.t. -x <= -1  -> x = 1 with multiplier 2
        let mut q = [1.0];
        let sol = quadprog::solve_qp(&mut q, &[1.0], &[-1.0], &[-1.0], 0, false).unwrap();
        assert_relative_eq!(sol.sol[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(sol.lagr[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn solves_linearly_constrained_quadratic() {
        let res = minimize(&Quadratic, &[0.0, 0.0], &SqpOptions::default());
        assert!(res.converged(), "{res:?}");
        assert_relative_eq!(res.x[0], 1.0, epsilon = 1e-6);
        assert_relative_eq!(res.x[1], 0.0, epsilon = 1e-6);
        assert_relative_eq!(res.multipliers[0], 2.0, epsilon = 1e-5);
    }

    struct Rosenbrock;
    impl Nlp for Rosenbrock {
        fn lower(&self) -> &[f64] {
            &[-2.0, -2.0]
        }
        fn upper(&self) -> &[f64] {
            &[2.0, 2.0]
        }
        // disc constraint x^2 + y^2 <= 1.5, optimum on the boundary
        fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
            let f = (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
            (f, vec![x[0] * x[0] + x[1] * x[1] - 1.5, -x[0] - 5.0])
        }
    }

    #[test]
    fn nonlinear_constraint_from_infeasible_start() {
        let res = minimize(&Rosenbrock, &[-1.9, 1.9], &SqpOptions::default());
        assert!(res.converged(), "{res:?}");
        assert!(res.violation <= 1e-6);
        // reference optimum of the disc-constrained Rosenbrock problem
        let r2 = res.x[0].powi(2) + res.x[1].powi(2);
        assert_relative_eq!(r2, 1.5, epsilon = 1e-6);
        assert_relative_eq!(res.x[0], 0.9072, epsilon = 1e-3);
    }

    struct Impossible;
    impl Nlp for Impossible {
        fn lower(&self) -> &[f64] {
            &[-1.0]
        }
        fn upper(&self) -> &[f64] {
            &[1.0]
        }
        fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
            (x[0], vec![1.0 - x[0] * x[0] * 0.1])
        }
    }

    #[test]
    fn reports_infeasibility() {
        let res = minimize(&Impossible, &[0.3], &SqpOptions::default());
        assert!(!res.converged());
        assert!(res.violation > 0.5);
    }
}
