//! Control-point collocation: the unknowns are the flattened control
//! points of a degree-`n` composite over the given knots. Derivatives are
//! taken through powers of the degree-preserving differentiation matrix,
//! the ODE is collocated at the per-segment equidistant nodes with control
//! points standing in for nodal values, and the square system is completed
//! by the boundary conditions plus explicit `C^(r-1)` continuity at every
//! interior knot.

use std::time::Instant;

use crate::bernstein::d_matrix;
use crate::composite::{segment_nodes, validate_knots, CompositeBernstein};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::ode::OdeProblem;
use crate::report::{Method, SolveReport};
use crate::solver::{newton_solve, SolverOptions};

/// Precomputed residual assembly for one (problem, degree, knots) triple.
pub struct CpSystem<'a> {
    ode: &'a OdeProblem,
    n: usize,
    knots: Vec<f64>,
    /// Per segment: `D^0 .. D^r`, each `(n+1) x (n+1)`.
    d_powers: Vec<Vec<DenseMatrix>>,
    /// Per segment: the `n+1` equidistant collocation nodes.
    nodes: Vec<Vec<f64>>,
    /// Per segment: local collocation rows kept after squaring.
    keep: Vec<Vec<usize>>,
}

impl<'a> CpSystem<'a> {
    pub fn new(ode: &'a OdeProblem, n: usize, knots: &[f64]) -> Result<Self> {
        validate_knots(knots)?;
        let r = ode.order;
        if n <= r {
            return Err(Error::InvalidParameter(format!(
                "control-point collocation needs degree n > r; got n = {n}, r = {r}"
            )));
        }
        check_knots_span_domain(ode, knots)?;

        let k = knots.len() - 1;
        let mut d_powers = Vec::with_capacity(k);
        let mut nodes = Vec::with_capacity(k);
        for i in 0..k {
            let iv = crate::bernstein::Interval::new(knots[i], knots[i + 1])?;
            let d = d_matrix(n, iv)?;
            let mut powers = vec![DenseMatrix::identity(n + 1)];
            for l in 1..=r {
                powers.push(powers[l - 1].matmul(&d)?);
            }
            d_powers.push(powers);
            nodes.push(segment_nodes(knots[i], knots[i + 1], n).collect());
        }

        // Squaring: each segment contributes n+1 collocation rows but only
        // n+1-r may be kept (conditions and continuity fill the rest). For
        // initial value problems the leading r rows of every segment are
        // redundant with the conditions/continuity that pin that segment's
        // left end. For boundary value problems the pinning is split
        // between both ends, and dropping rows symmetrically at both ends
        // of every segment is what keeps the system well conditioned.
        let keep_range = if ode.is_initial_value_problem() {
            r..=n
        } else {
            r.div_ceil(2)..=(n - r / 2)
        };
        let keep: Vec<Vec<usize>> = (0..k).map(|_| keep_range.clone().collect()).collect();

        Ok(CpSystem {
            ode,
            n,
            knots: knots.to_vec(),
            d_powers,
            nodes,
            keep,
        })
    }

    pub fn k(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn unknowns(&self) -> usize {
        self.k() * (self.n + 1)
    }

    /// All derivative levels of every segment: `levels[i][l][j]` is the
    /// `j`-th control point of `x^(l)` on segment `i` (kept at degree `n`).
    fn levels(&self, flat: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let per = self.n + 1;
        (0..self.k())
            .map(|i| {
                let b = &flat[i * per..(i + 1) * per];
                self.d_powers[i]
                    .iter()
                    .map(|d| d.vecmat(b).expect("square maps"))
                    .collect()
            })
            .collect()
    }

    /// Square residual vector of length `K * (n + 1)`.
    #[allow(clippy::needless_range_loop)] // index form mirrors the row layout
    pub fn residual(&self, flat: &[f64]) -> Vec<f64> {
        let r = self.ode.order;
        let n = self.n;
        let k = self.k();
        let levels = self.levels(flat);
        let mut out = Vec::with_capacity(self.unknowns());

        // Collocation rows (control points as nodal values).
        for i in 0..k {
            for &j in &self.keep[i] {
                let derivs: Vec<f64> = (0..=r).map(|l| levels[i][l][j]).collect();
                out.push(self.ode.residual_at(self.nodes[i][j], &derivs));
            }
        }

        // Condition rows: endpoint control points are endpoint values.
        for c in &self.ode.conditions {
            let mut acc = -c.value;
            for l in 0..r {
                acc += c.left[l] * levels[0][l][0] + c.right[l] * levels[k - 1][l][n];
            }
            out.push(acc);
        }

        // Continuity rows: match x^(l) across every interior knot.
        for i in 1..k {
            for l in 0..r {
                out.push(levels[i - 1][l][n] - levels[i][l][0]);
            }
        }

        out
    }

    /// Flat initial iterate: constant at the problem's pinned left value
    /// when one exists, zero otherwise.
    pub fn initial_guess(&self) -> Vec<f64> {
        let fill = self.ode.left_value_hint().unwrap_or(0.0);
        vec![fill; self.unknowns()]
    }
}

/// Solve by damped Newton; returns the composite plus a timing/convergence
/// report. Non-convergence is reported, not raised.
pub fn solve(
    ode: &OdeProblem,
    n: usize,
    knots: &[f64],
    opts: &SolverOptions,
) -> Result<(CompositeBernstein, SolveReport)> {
    let start = Instant::now();
    let system = CpSystem::new(ode, n, knots)?;
    let f = |flat: &[f64]| system.residual(flat);
    let (flat, stats) = newton_solve(&f, &system.initial_guess(), opts);
    let cbp = CompositeBernstein::from_flat(knots.to_vec(), n, &flat)?;
    let report = SolveReport {
        method: Method::Cp { n },
        k: system.k(),
        unknowns: system.unknowns(),
        iterations: stats.iterations,
        residual_inf: stats.residual_inf,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        converged: stats.converged,
    };
    Ok((cbp, report))
}

/// Block-diagonal degree-preserving differentiation map for the whole
/// composite: `K(n+1)` square, one `d_matrix` block per segment. Flat
/// control points times this matrix give the segment-wise derivative's
/// control points re-elevated to degree `n`.
pub fn block_d_matrix(knots: &[f64], n: usize) -> Result<DenseMatrix> {
    validate_knots(knots)?;
    let k = knots.len() - 1;
    let per = n + 1;
    let mut big = DenseMatrix::zeros(k * per, k * per);
    for i in 0..k {
        let iv = crate::bernstein::Interval::new(knots[i], knots[i + 1])?;
        let d = d_matrix(n, iv)?;
        for a in 0..per {
            for b in 0..per {
                big[(i * per + a, i * per + b)] = d[(a, b)];
            }
        }
    }
    Ok(big)
}

fn check_knots_span_domain(ode: &OdeProblem, knots: &[f64]) -> Result<()> {
    let s0 = ode.domain.s0();
    let sf = ode.domain.sf();
    let scale = (sf - s0).abs();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * scale.max(1.0);
    if !close(knots[0], s0) || !close(*knots.last().unwrap(), sf) {
        return Err(Error::InvalidKnots(format!(
            "knots [{}, {}] must span the problem domain [{}, {}]",
            knots[0],
            knots.last().unwrap(),
            s0,
            sf
        )));
    }
    Ok(())
}
