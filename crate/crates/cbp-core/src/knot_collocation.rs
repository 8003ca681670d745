//! Knot collocation: the unknowns are the per-segment constants of the
//! highest represented derivative `x^(M)` plus the `M` initial values
//! `x(s0) .. x^(M-1)(s0)` — a vector `theta` of length `K + M`. All lower
//! derivatives are linear images of `theta` obtained by exact segment-wise
//! antidifferentiation with continuity chained in by construction, so the
//! collocation system couples only `K + M` unknowns no matter the degree
//! of the reconstructed composite.

use std::time::Instant;

use crate::bernstein::{basis_value, gamma_matrix, Interval};
use crate::composite::{validate_knots, CompositeBernstein};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::ode::OdeProblem;
use crate::report::{Method, SolveReport};
use crate::solver::{newton_solve, SolverOptions};

/// One antidifferentiation step as a matrix on the extended state
/// `theta_n = [flat degree-n control points of x^(M-n) | x(s0) .. x^(M-n-1)(s0)]`:
///
/// * each segment's control-point block passes through its `gamma` map;
/// * every control point of segment `i` feeds `h_i / (n+1)` (the full
///   segment integral per unit control point) into all later segments'
///   blocks — the chained left values;
/// * the initial value consumed at this step (`x^(M-n-1)(s0)`) adds 1 to
///   every control point, and the remaining initial values pass through.
///
/// Shape: `(K(n+1) + M - n) x (K(n+2) + M - n - 1)`.
pub fn zeta_matrix(n: usize, knots: &[f64], m: usize) -> Result<DenseMatrix> {
    validate_knots(knots)?;
    if n >= m {
        return Err(Error::InvalidParameter(format!(
            "zeta step index {n} must be below the integration depth {m}"
        )));
    }
    let k = knots.len() - 1;
    let rows = k * (n + 1) + (m - n);
    let cols = k * (n + 2) + (m - n - 1);
    let mut z = DenseMatrix::zeros(rows, cols);

    for i in 0..k {
        let iv = Interval::new(knots[i], knots[i + 1])?;
        let g = gamma_matrix(n, iv);
        for a in 0..=n {
            for b in 0..n + 2 {
                z[(i * (n + 1) + a, i * (n + 2) + b)] = g[(a, b)];
            }
        }
        let spill = iv.len() / (n + 1) as f64;
        for j in i + 1..k {
            for a in 0..=n {
                for b in 0..n + 2 {
                    z[(i * (n + 1) + a, j * (n + 2) + b)] = spill;
                }
            }
        }
    }

    // Initial value consumed by this integration step: adds to every
    // control point of the new representation.
    let consumed_row = k * (n + 1) + (m - n - 1);
    for col in 0..k * (n + 2) {
        z[(consumed_row, col)] = 1.0;
    }
    // Remaining initial values pass through unchanged.
    for t in 0..m - n - 1 {
        z[(k * (n + 1) + t, k * (n + 2) + t)] = 1.0;
    }
    Ok(z)
}

/// Knot-value extractor for the degree-`mm` representation: picks the
/// first control point of segment 0 and the last control point of every
/// segment, i.e. the values at `s_0 .. s_K`.
/// Shape: `(K(mm+1) + M - mm) x (K + 1)`.
pub fn extractor_matrix(mm: usize, knots: &[f64], m: usize) -> Result<DenseMatrix> {
    validate_knots(knots)?;
    if mm > m {
        return Err(Error::InvalidParameter(format!(
            "extractor level {mm} above integration depth {m}"
        )));
    }
    let k = knots.len() - 1;
    let mut p = DenseMatrix::zeros(k * (mm + 1) + (m - mm), k + 1);
    p[(0, 0)] = 1.0;
    for seg in 1..=k {
        p[(seg * (mm + 1) - 1, seg)] = 1.0;
    }
    Ok(p)
}

/// The full reconstruction chain for a `(knots, M)` pair: cumulative
/// antidifferentiation maps `Z_m = zeta_0 ... zeta_{m-1}` and the
/// knot-value maps `T_l` with `theta * T_l = [x^(l)(s_0), ..., x^(l)(s_K)]`.
pub struct ThetaChain {
    knots: Vec<f64>,
    m: usize,
    zetas: Vec<DenseMatrix>,
    cumulative: Vec<DenseMatrix>,
    t_mats: Vec<DenseMatrix>,
}

impl ThetaChain {
    pub fn new(knots: &[f64], m: usize) -> Result<Self> {
        validate_knots(knots)?;
        if m == 0 {
            return Err(Error::InvalidParameter(
                "integration depth M must be at least 1".into(),
            ));
        }
        let k = knots.len() - 1;
        let zetas: Result<Vec<DenseMatrix>> =
            (0..m).map(|n| zeta_matrix(n, knots, m)).collect();
        let zetas = zetas?;

        let mut cumulative = vec![DenseMatrix::identity(k + m)];
        for z in &zetas {
            let next = cumulative.last().unwrap().matmul(z)?;
            cumulative.push(next);
        }

        // T_l = Z_{M-l} * P_{M-l}: antidifferentiate down to level l, then
        // read off the knot values of the degree-(M-l) representation.
        let t_mats: Result<Vec<DenseMatrix>> = (0..=m)
            .map(|l| cumulative[m - l].matmul(&extractor_matrix(m - l, knots, m)?))
            .collect();

        Ok(ThetaChain {
            knots: knots.to_vec(),
            m,
            zetas,
            cumulative,
            t_mats: t_mats?,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.knots.len() - 1
    }

    /// Length of `theta`: `K + M`.
    pub fn dim(&self) -> usize {
        self.k() + self.m
    }

    pub fn zeta(&self, step: usize) -> &DenseMatrix {
        &self.zetas[step]
    }

    pub fn t_matrix(&self, level: usize) -> &DenseMatrix {
        &self.t_mats[level]
    }

    /// `[x^(level)(s_0), ..., x^(level)(s_K)]` for the given `theta`.
    pub fn knot_values(&self, theta: &[f64], level: usize) -> Result<Vec<f64>> {
        if level > self.m {
            return Err(Error::InvalidParameter(format!(
                "derivative level {} above integration depth {}",
                level, self.m
            )));
        }
        self.t_mats[level].vecmat(theta)
    }

    /// The composite representing `x^(level)` (degree `M - level`).
    pub fn reconstruct(&self, theta: &[f64], level: usize) -> Result<CompositeBernstein> {
        if level > self.m {
            return Err(Error::InvalidParameter(format!(
                "derivative level {} above integration depth {}",
                level, self.m
            )));
        }
        let steps = self.m - level;
        let extended = self.cumulative[steps].vecmat(theta)?;
        let k = self.k();
        CompositeBernstein::from_flat(self.knots.clone(), steps, &extended[..k * (steps + 1)])
    }

    /// Row vectors `w_l` with `theta . w_l = x^(l)(s)` for a point `s`
    /// inside the first segment — used for the extra midpoint condition.
    fn first_segment_eval_rows(&self, s: f64) -> Result<Vec<Vec<f64>>> {
        let iv = Interval::new(self.knots[0], self.knots[1])?;
        (0..=self.m)
            .map(|l| {
                let steps = self.m - l;
                let mut weights = vec![0.0; self.cumulative[steps].cols()];
                for (j, w) in weights.iter_mut().take(steps + 1).enumerate() {
                    *w = basis_value(steps, j, s, iv)?;
                }
                self.cumulative[steps].matvec(&weights)
            })
            .collect()
    }
}

/// Residual assembly for the knot-collocation solve.
pub struct KnotSystem<'a> {
    ode: &'a OdeProblem,
    chain: ThetaChain,
    /// Precomputed `theta`-to-derivative rows at the extra midpoint
    /// condition (present only for `M = r + 2`).
    midpoint: Option<(f64, Vec<Vec<f64>>)>,
}

impl<'a> KnotSystem<'a> {
    pub fn new(ode: &'a OdeProblem, m: usize, knots: &[f64]) -> Result<Self> {
        let r = ode.order;
        if m != r + 1 && m != r + 2 {
            return Err(Error::InvalidParameter(format!(
                "knot collocation supports M = r+1 or r+2; got M = {m} for r = {r}"
            )));
        }
        validate_knots(knots)?;
        let scale = ode.domain.len().max(1.0);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * scale;
        if !close(knots[0], ode.domain.s0()) || !close(*knots.last().unwrap(), ode.domain.sf()) {
            return Err(Error::InvalidKnots(format!(
                "knots [{}, {}] must span the problem domain [{}, {}]",
                knots[0],
                knots.last().unwrap(),
                ode.domain.s0(),
                ode.domain.sf()
            )));
        }

        let chain = ThetaChain::new(knots, m)?;
        let midpoint = if m == r + 2 {
            // The square count needs one more equation than knots plus
            // conditions provide; collocate the ODE once more at the first
            // segment's midpoint.
            let sigma = knots[0] + 0.5 * (knots[1] - knots[0]);
            let rows = chain.first_segment_eval_rows(sigma)?;
            Some((sigma, rows))
        } else {
            None
        };
        Ok(KnotSystem {
            ode,
            chain,
            midpoint,
        })
    }

    pub fn chain(&self) -> &ThetaChain {
        &self.chain
    }

    pub fn unknowns(&self) -> usize {
        self.chain.dim()
    }

    /// Square residual of length `K + M`: the ODE at every knot, the `r`
    /// boundary/initial conditions, and (for `M = r + 2`) the ODE at the
    /// first-segment midpoint.
    #[allow(clippy::needless_range_loop)] // index form mirrors the row layout
    pub fn residual(&self, theta: &[f64]) -> Vec<f64> {
        let r = self.ode.order;
        let k = self.chain.k();
        let knots = self.chain.knots();
        let values: Vec<Vec<f64>> = (0..=r)
            .map(|l| self.chain.knot_values(theta, l).expect("level <= m"))
            .collect();

        let mut out = Vec::with_capacity(self.unknowns());
        for (idx, &s) in knots.iter().enumerate() {
            let derivs: Vec<f64> = (0..=r).map(|l| values[l][idx]).collect();
            out.push(self.ode.residual_at(s, &derivs));
        }
        for c in &self.ode.conditions {
            let mut acc = -c.value;
            for l in 0..r {
                acc += c.left[l] * values[l][0] + c.right[l] * values[l][k];
            }
            out.push(acc);
        }
        if let Some((sigma, rows)) = &self.midpoint {
            let derivs: Vec<f64> = rows[..=r]
                .iter()
                .map(|w| w.iter().zip(theta).map(|(a, b)| a * b).sum())
                .collect();
            out.push(self.ode.residual_at(*sigma, &derivs));
        }
        out
    }

    /// Zero iterate with the initial-value slots seeded from any
    /// conditions that pin them directly.
    pub fn initial_guess(&self) -> Vec<f64> {
        let k = self.chain.k();
        let r = self.ode.order;
        let mut theta = vec![0.0; self.unknowns()];
        for c in &self.ode.conditions {
            if c.involves_right_endpoint() {
                continue;
            }
            let hot: Vec<usize> = (0..r).filter(|&l| c.left[l] != 0.0).collect();
            if let [l] = hot[..] {
                if c.left[l] == 1.0 {
                    theta[k + l] = c.value;
                }
            }
        }
        theta
    }
}

/// Solve by damped Newton; returns the reconstructed `x` composite
/// (degree `M`) plus the report. Non-convergence is reported, not raised.
pub fn solve(
    ode: &OdeProblem,
    m: usize,
    knots: &[f64],
    opts: &SolverOptions,
) -> Result<(CompositeBernstein, SolveReport)> {
    let start = Instant::now();
    let system = KnotSystem::new(ode, m, knots)?;
    let f = |theta: &[f64]| system.residual(theta);
    let (theta, stats) = newton_solve(&f, &system.initial_guess(), opts);
    let cbp = system.chain.reconstruct(&theta, 0)?;
    let report = SolveReport {
        method: Method::Knot { m },
        k: system.chain.k(),
        unknowns: system.unknowns(),
        iterations: stats.iterations,
        residual_inf: stats.residual_inf,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        converged: stats.converged,
    };
    Ok((cbp, report))
}
