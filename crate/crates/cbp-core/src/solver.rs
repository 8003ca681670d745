//! Nonlinear solvers used by both collocation methods: damped Newton for
//! square systems, Levenberg-Marquardt for least-squares shaped systems,
//! and an augmented Lagrangian outer loop for problems with inequality
//! constraints. Jacobians are forward finite differences throughout — the
//! systems are small and the right-hand sides are cheap.

use crate::matrix::DenseMatrix;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Residual / gradient infinity-norm target.
    pub tol: f64,
    pub max_iters: usize,
    /// Finite-difference step is `fd_step_scale * max(1, |x_j|)`.
    pub fd_step_scale: f64,
    /// Backtracking line-search depth in the Newton path.
    pub max_halvings: usize,
    /// Initial Levenberg-Marquardt damping.
    pub lm_lambda0: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iters: 100,
            fd_step_scale: f64::EPSILON.sqrt(),
            max_halvings: 30,
            lm_lambda0: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual_inf: f64,
    pub converged: bool,
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Forward-difference Jacobian of `f` at `x`, given `fx = f(x)`.
pub fn fd_jacobian(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    fx: &[f64],
    step_scale: f64,
) -> DenseMatrix {
    let mut jac = DenseMatrix::zeros(fx.len(), x.len());
    let mut xh = x.to_vec();
    for j in 0..x.len() {
        let h = step_scale * x[j].abs().max(1.0);
        xh[j] = x[j] + h;
        let fh = f(&xh);
        xh[j] = x[j];
        // Use the actually-realized step: x + h may round.
        let denom = xh[j] + h - xh[j];
        for i in 0..fx.len() {
            jac[(i, j)] = (fh[i] - fx[i]) / denom;
        }
    }
    jac
}

/// Solve `(J^T J + lambda I) d = -J^T fx`; always solvable for lambda > 0.
fn damped_step(jac: &DenseMatrix, fx: &[f64], lambda: f64) -> Vec<f64> {
    let jt = jac.transpose();
    let mut jtj = jt.matmul(jac).expect("shapes agree by construction");
    let n = jtj.rows();
    for i in 0..n {
        jtj[(i, i)] += lambda;
    }
    let mut rhs = jt.matvec(fx).expect("shapes agree by construction");
    for r in rhs.iter_mut() {
        *r = -*r;
    }
    jtj.solve(&rhs)
        .expect("positive-definite after damping")
}

/// Damped Newton for square systems `f(x) = 0`. Falls back to a single
/// Levenberg-Marquardt-regularized step whenever the Jacobian factorization
/// hits a zero pivot.
pub fn newton_solve(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    opts: &SolverOptions,
) -> (Vec<f64>, SolveStats) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut norm = inf_norm(&fx);
    let mut iterations = 0;

    while norm > opts.tol && iterations < opts.max_iters {
        iterations += 1;
        let jac = fd_jacobian(f, &x, &fx, opts.fd_step_scale);
        let neg_fx: Vec<f64> = fx.iter().map(|v| -v).collect();
        let step = match jac.lu_factor() {
            Ok(factors) => factors.solve(&neg_fx).expect("square system"),
            Err(_) => damped_step(&jac, &fx, opts.lm_lambda0),
        };

        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x
                .iter()
                .zip(&step)
                .map(|(xi, di)| xi + alpha * di)
                .collect();
            let ft = f(&trial);
            let tn = inf_norm(&ft);
            if tn < norm {
                x = trial;
                fx = ft;
                norm = tn;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break; // line search exhausted: no descent direction left
        }
    }

    let converged = norm <= opts.tol;
    (
        x,
        SolveStats {
            iterations,
            residual_inf: norm,
            converged,
        },
    )
}

/// Levenberg-Marquardt for (possibly non-square) least squares
/// `min ||f(x)||^2`. Stops on a small gradient, a small accepted step, or
/// the iteration cap; `converged` reflects the first two.
pub fn lm_solve(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    opts: &SolverOptions,
) -> (Vec<f64>, SolveStats) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut cost = two_norm(&fx);
    let mut lambda = opts.lm_lambda0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iters {
        iterations += 1;
        let jac = fd_jacobian(f, &x, &fx, opts.fd_step_scale);
        let gradient = jac.transpose().matvec(&fx).expect("shapes agree");
        if inf_norm(&gradient) <= opts.tol {
            converged = true;
            break;
        }

        let mut accepted = false;
        while lambda <= 1e12 {
            let step = damped_step(&jac, &fx, lambda);
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, di)| xi + di).collect();
            let ft = f(&trial);
            let tc = two_norm(&ft);
            if tc < cost {
                let small_step = two_norm(&step) <= opts.tol * (1.0 + two_norm(&x));
                x = trial;
                fx = ft;
                cost = tc;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small_step {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || converged {
            // Damping exhausted without descent: treat as stationary.
            converged = converged || !accepted;
            break;
        }
    }

    (
        x,
        SolveStats {
            iterations,
            residual_inf: inf_norm(&fx),
            converged,
        },
    )
}

#[derive(Debug, Clone)]
pub struct AuglagOptions {
    pub outer_max: usize,
    /// Initial penalty weight and its growth factor per violated round.
    pub rho0: f64,
    pub rho_growth: f64,
    /// Equality residual infinity-norm target.
    pub eq_tol: f64,
    /// Inequality violation target (on `max_i g_i`).
    pub ineq_tol: f64,
    pub inner: SolverOptions,
}

impl Default for AuglagOptions {
    fn default() -> Self {
        AuglagOptions {
            outer_max: 10,
            rho0: 10.0,
            rho_growth: 10.0,
            eq_tol: 1e-8,
            ineq_tol: 1e-8,
            inner: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AuglagResult {
    pub x: Vec<f64>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub eq_residual_inf: f64,
    /// `max(0, max_i g_i(x))` at the returned point.
    pub max_violation: f64,
    /// Index of the worst inequality component, when violated.
    pub worst_index: Option<usize>,
    /// Both tolerance targets met.
    pub feasible: bool,
}

/// Augmented Lagrangian for `f_eq(x) = 0` subject to `g_ineq(x) <= 0`
/// component-wise. Each outer round hands the inner least-squares solver
/// the stacked rows
///
/// ```text
/// [ f_eq(x) ; sqrt(rho) * max(0, mu/rho + g(x)) ]
/// ```
///
/// then updates the hinge multipliers (`mu <- max(0, mu + rho g(x))`) and
/// inflates `rho` after every round that ends with a violation. The
/// asymmetry is deliberate: equality rows keep unit weight, so as `rho`
/// grows the hinge side dominates and violations are squeezed out first.
/// On an infeasible problem that leaves the irreconcilable gap on the
/// equality residual — violations near zero, `feasible: false`, and
/// `eq_residual_inf` reporting how far the equalities had to give.
/// Multipliers are clamped so they cannot overflow while diverging on
/// such problems.
pub fn auglag_solve(
    f_eq: &dyn Fn(&[f64]) -> Vec<f64>,
    g_ineq: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    opts: &AuglagOptions,
) -> AuglagResult {
    const MULTIPLIER_CAP: f64 = 1e8;
    let mut x = x0.to_vec();
    let mut mu = vec![0.0; g_ineq(&x).len()];
    let mut rho = opts.rho0;
    let mut outer_iterations = 0;
    let mut inner_iterations = 0;

    loop {
        outer_iterations += 1;
        let sqrt_rho = rho.sqrt();
        let mu_snapshot = mu.clone();
        let stacked = |y: &[f64]| -> Vec<f64> {
            let mut v = f_eq(y);
            v.extend(
                g_ineq(y)
                    .iter()
                    .zip(&mu_snapshot)
                    .map(|(g, m)| sqrt_rho * (m / rho + g).max(0.0)),
            );
            v
        };
        let (next, stats) = lm_solve(&stacked, &x, &opts.inner);
        x = next;
        inner_iterations += stats.iterations;

        let f = f_eq(&x);
        let g = g_ineq(&x);
        let eq_residual_inf = inf_norm(&f);
        let (worst_index, max_violation) = g
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or((None, 0.0), |(i, &v)| (Some(i), v.max(0.0)));

        for (m, gi) in mu.iter_mut().zip(&g) {
            *m = (*m + rho * gi).clamp(0.0, MULTIPLIER_CAP);
        }

        let feasible = eq_residual_inf <= opts.eq_tol && max_violation <= opts.ineq_tol;
        if feasible || outer_iterations >= opts.outer_max {
            return AuglagResult {
                x,
                outer_iterations,
                inner_iterations,
                eq_residual_inf,
                max_violation,
                worst_index: (max_violation > 0.0).then(|| worst_index.unwrap()),
                feasible,
            };
        }
        if max_violation > opts.ineq_tol {
            rho = (rho * opts.rho_growth).min(1e12);
        }
    }
}
