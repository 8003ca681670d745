//! Benchmark problem registry. Examples 1-4 are scalar ODEs with known
//! closed forms; Examples 5-6 are differential algebraic inequalities
//! (a tracked double integrator with input limits, and a planar rod
//! steering around a circular obstacle). All constants live here.

use crate::bernstein::Interval;
use crate::composite::{uniform_knots, CompositeBernstein};
use crate::dai::{
    approximate_nonpoly, DaiEval, DaiProblem, DaiUnknown, InequalityBuilder, Parameterization,
};
use crate::error::{Error, Result};
use crate::ode::{Condition, OdeProblem, SingularOverride};

/// Build ODE example `id` (1-4).
pub fn ode_example(id: usize) -> Result<OdeProblem> {
    match id {
        1 => Ok(lane_emden()),
        2 => Ok(harmonic_bvp()),
        3 => Ok(fourth_order_ivp()),
        4 => Ok(kinked_slope()),
        _ => Err(Error::UnknownExample(id)),
    }
}

/// Example 1: Lane-Emden equation of index 5,
/// `x'' + (2/s) x' + x^5 = 0`, `x(0) = 1`, `x'(0) = 0` on `[0, 3]`,
/// closed form `x(s) = 1 / sqrt(1 + s^2/3)`. The `2/s` term is singular
/// at the left endpoint; its finite limit form `3 x'' + x^5 = 0` is
/// installed as the override there.
fn lane_emden() -> OdeProblem {
    OdeProblem {
        name: "lane_emden".into(),
        order: 2,
        domain: Interval::new(0.0, 3.0).unwrap(),
        rhs: Box::new(|s, d| -2.0 * d[1] / s - d[0].powi(5)),
        conditions: vec![
            Condition::initial(2, 0, 1.0),
            Condition::initial(2, 1, 0.0),
        ],
        singular_override: Some(SingularOverride {
            matches: Box::new(|s| s.abs() < 1e-12),
            residual: Box::new(|_s, d| d[2] + d[0].powi(5) / 3.0),
        }),
        exact: Some(Box::new(|s| 1.0 / (1.0 + s * s / 3.0).sqrt())),
    }
}

/// Example 2: `x'' + 3x = 0`, `x(0) = 7`, `x(2 pi) = 0`, closed form
/// `7 cos(sqrt(3) s) - 7 cot(2 sqrt(3) pi) sin(sqrt(3) s)`.
fn harmonic_bvp() -> OdeProblem {
    let sf = 2.0 * std::f64::consts::PI;
    let sqrt3 = 3.0f64.sqrt();
    let cot = (sqrt3 * sf).cos() / (sqrt3 * sf).sin();
    OdeProblem {
        name: "harmonic_bvp".into(),
        order: 2,
        domain: Interval::new(0.0, sf).unwrap(),
        rhs: Box::new(|_s, d| -3.0 * d[0]),
        conditions: vec![
            Condition::initial(2, 0, 7.0),
            Condition::terminal(2, 0, 0.0),
        ],
        singular_override: None,
        exact: Some(Box::new(move |s| {
            7.0 * (sqrt3 * s).cos() - 7.0 * cot * (sqrt3 * s).sin()
        })),
    }
}

/// Example 3: `x'''' - 5 x'' + 4 x = sin(s) + cos(2s)` on `[0, 1]` with
/// `x(0) = -1`, `x'(0) = 0`, `x''(0) = -2`, `x'''(0) = 1`. The closed
/// form below solves exactly this initial value problem (characteristic
/// roots ±1, ±2 plus particular terms `sin(s)/10 + cos(2s)/40`); it is
/// cross-checked against a high-resolution integrator in the tests.
fn fourth_order_ivp() -> OdeProblem {
    OdeProblem {
        name: "fourth_order_ivp".into(),
        order: 4,
        domain: Interval::new(0.0, 1.0).unwrap(),
        rhs: Box::new(|s, d| 5.0 * d[2] - 4.0 * d[0] + s.sin() + (2.0 * s).cos()),
        conditions: vec![
            Condition::initial(4, 0, -1.0),
            Condition::initial(4, 1, 0.0),
            Condition::initial(4, 2, -2.0),
            Condition::initial(4, 3, 1.0),
        ],
        singular_override: None,
        exact: Some(Box::new(|s| {
            (-59.0 * (-2.0 * s).exp()
                - 28.0 * (-s).exp()
                - 148.0 * s.exp()
                - 11.0 * (2.0 * s).exp())
                / 240.0
                + s.sin() / 10.0
                + (2.0 * s).cos() / 40.0
        })),
    }
}

/// Example 4: `x' = |s - 1/2|`, `x(0) = 1` on `[0, 1]`. The solution is
/// piecewise quadratic with a curvature kink at `s = 1/2`, so composites
/// with a knot exactly there represent it exactly.
fn kinked_slope() -> OdeProblem {
    OdeProblem {
        name: "kinked_slope".into(),
        order: 1,
        domain: Interval::new(0.0, 1.0).unwrap(),
        rhs: Box::new(|s, _d| (s - 0.5).abs()),
        conditions: vec![Condition::initial(1, 0, 1.0)],
        singular_override: None,
        exact: Some(Box::new(|s| {
            if s <= 0.5 {
                -0.5 * s * s + 0.5 * s + 1.0
            } else {
                0.5 * (s - 0.5) * (s - 0.5) + 1.125
            }
        })),
    }
}

/// Target trajectory of Example 5.
pub fn ex5_target(t: f64) -> f64 {
    2.0 * t.sin() * (2.0 * t).cos()
}

/// Which collocation parameterization a DAI instance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaiMethod {
    /// Theta-chain unknowns; dynamics enforced at the knots.
    Knot,
    /// Flat control-point unknowns; dynamics at the knots, or at every
    /// control-point node when `strict`.
    Cp { strict: bool },
}

/// Example 5 instance parameters. The domain end is a harness choice (the
/// source problem never fixes it numerically); every other number is the
/// problem's own. `band` is the allowed distance from the target.
#[derive(Debug, Clone, Copy)]
pub struct Ex5Params {
    pub t_end: f64,
    pub gamma: f64,
    pub u_max: f64,
    pub band: f64,
    pub k: usize,
    pub m: usize,
    pub method: DaiMethod,
}

impl Default for Ex5Params {
    fn default() -> Self {
        Ex5Params {
            t_end: 10.0,
            gamma: 1.0,
            u_max: 5.0,
            band: 0.2,
            k: 25,
            m: 3,
            method: DaiMethod::Knot,
        }
    }
}

/// Example 5: a damped double integrator `x'' = u - gamma x'` from rest,
/// required to stay within `band` of the target `2 sin(t) cos(2t)` using
/// an input bounded by `u_max`. Four inequality families: both input
/// bounds and both sides of the tracking band, all on control points.
pub fn example5(p: Ex5Params) -> Result<DaiProblem> {
    if p.k < 2 {
        return Err(Error::InvalidParameter("example 5 needs K >= 2".into()));
    }
    if p.m != 3 && p.m != 4 {
        return Err(Error::InvalidParameter(
            "example 5 integration depth must be 3 or 4 (order r = 2)".into(),
        ));
    }
    let knots = uniform_knots(0.0, p.t_end, p.k);
    let x_degree = match p.method {
        DaiMethod::Knot => p.m,
        DaiMethod::Cp { .. } => p.m, // same degree for a like-for-like band
    };
    let target_hat = approximate_nonpoly(ex5_target, &knots, x_degree)?;

    let (unknowns, guess_len) = match p.method {
        DaiMethod::Knot => (
            vec![
                DaiUnknown {
                    name: "x".into(),
                    param: Parameterization::Knot { m: p.m },
                },
                DaiUnknown {
                    name: "u".into(),
                    param: Parameterization::Knot { m: 1 },
                },
            ],
            (p.k + p.m) + (p.k + 1),
        ),
        DaiMethod::Cp { .. } => (
            vec![
                DaiUnknown {
                    name: "x".into(),
                    param: Parameterization::Cp { n: p.m },
                },
                DaiUnknown {
                    name: "u".into(),
                    param: Parameterization::Cp { n: 1 },
                },
            ],
            p.k * (p.m + 1) + p.k * 2,
        ),
    };

    let gamma = p.gamma;
    let method = p.method;
    let eq_knots = knots.clone();
    let equalities = Box::new(move |ev: &DaiEval| -> Vec<f64> {
        let mut rows = Vec::new();
        match method {
            DaiMethod::Knot => {
                let x0 = ev.knot_values("x", 0).expect("level within depth");
                let x1 = ev.knot_values("x", 1).expect("level within depth");
                let x2 = ev.knot_values("x", 2).expect("level within depth");
                let u0 = ev.knot_values("u", 0).expect("level within depth");
                for i in 0..x0.len() {
                    rows.push(x2[i] - (u0[i] - gamma * x1[i]));
                }
                rows.push(x0[0]);
                rows.push(x1[0]);
            }
            DaiMethod::Cp { strict } => {
                let x0 = ev.cbp("x", 0).expect("wired");
                let x1 = ev.cbp("x", 1).expect("wired");
                let x2 = ev.cbp("x", 2).expect("wired");
                let u = ev.cbp("u", 0).expect("wired");
                let nodes: Vec<f64> = if strict {
                    crate::composite::collocation_grid(&eq_knots, x0.degree()).expect("valid")
                } else {
                    eq_knots.clone()
                };
                for &s in &nodes {
                    rows.push(x2.eval(s) - (u.eval(s) - gamma * x1.eval(s)));
                }
                rows.push(x0.eval(eq_knots[0]));
                rows.push(x1.eval(eq_knots[0]));
                rows.extend(ev.continuity_residuals("x", 2).expect("wired"));
                rows.extend(ev.continuity_residuals("u", 1).expect("wired"));
            }
        }
        rows
    });

    let u_max = p.u_max;
    let band = p.band;
    let hat_upper = target_hat.clone();
    let hat_lower = target_hat;
    let inequalities = vec![
        InequalityBuilder {
            label: "u_upper".into(),
            build: Box::new(move |ev| Ok(ev.cbp("u", 0)?.offset(-u_max))),
        },
        InequalityBuilder {
            label: "u_lower".into(),
            build: Box::new(move |ev| Ok(ev.cbp("u", 0)?.scale(-1.0).offset(-u_max))),
        },
        InequalityBuilder {
            label: "track_upper".into(),
            build: Box::new(move |ev| Ok(ev.cbp("x", 0)?.sub(&hat_upper)?.offset(-band))),
        },
        InequalityBuilder {
            label: "track_lower".into(),
            build: Box::new(move |ev| Ok(hat_lower.sub(&ev.cbp("x", 0)?)?.offset(-band))),
        },
    ];

    Ok(DaiProblem {
        name: "tracked_double_integrator".into(),
        knots,
        unknowns,
        equalities,
        inequalities,
        initial_guess: vec![0.0; guess_len],
    })
}

/// Example 6 geometry. The source formulation leaves the numbers open;
/// these are the harness defaults: a unit-length rod from the origin to
/// `(0.7, 0)` with a radius-0.2 circular obstacle at `(0.35, 0.05)`
/// sitting between the endpoints.
#[derive(Debug, Clone, Copy)]
pub struct Ex6Params {
    pub k: usize,
    pub length: f64,
    pub p0: (f64, f64),
    pub p_des: (f64, f64),
    pub obstacle: (f64, f64),
    pub r_safe: f64,
    pub nu1_range: (f64, f64),
    pub nu2_range: (f64, f64),
    pub u_max: f64,
}

impl Default for Ex6Params {
    fn default() -> Self {
        Ex6Params {
            k: 15,
            length: 1.0,
            p0: (0.0, 0.0),
            p_des: (0.7, 0.0),
            obstacle: (0.35, 0.05),
            r_safe: 0.2,
            nu1_range: (0.5, 1.5),
            nu2_range: (-0.5, 0.5),
            u_max: 6.0,
        }
    }
}

/// Position composites of a planar rod: the heading `phi` (quadratic) and
/// strains `nu1`, `nu2` (linear) give the tangent `R(phi) nu`, which is
/// non-polynomial; per segment it is sampled to a composite of the
/// heading's degree and integrated exactly, so the position is one degree
/// higher with structural continuity starting at `p0`.
pub fn rod_positions(
    phi: &CompositeBernstein,
    nu1: &CompositeBernstein,
    nu2: &CompositeBernstein,
    p0: (f64, f64),
) -> Result<(CompositeBernstein, CompositeBernstein)> {
    let tangent_degree = phi.degree();
    let px_dot = approximate_nonpoly(
        |s| phi.eval(s).cos() * nu1.eval(s) - phi.eval(s).sin() * nu2.eval(s),
        phi.knots(),
        tangent_degree,
    )?;
    let py_dot = approximate_nonpoly(
        |s| phi.eval(s).sin() * nu1.eval(s) + phi.eval(s).cos() * nu2.eval(s),
        phi.knots(),
        tangent_degree,
    )?;
    Ok((px_dot.antiderivative(p0.0), py_dot.antiderivative(p0.1)))
}

/// [`rod_positions`] read off a live evaluation of Example 6's unknowns.
pub fn ex6_positions(
    ev: &DaiEval,
    p0: (f64, f64),
) -> Result<(CompositeBernstein, CompositeBernstein)> {
    rod_positions(&ev.cbp("phi", 0)?, &ev.cbp("nu1", 0)?, &ev.cbp("nu2", 0)?, p0)
}

/// Example 6: steer a planar rod (heading `phi`, strains `nu`) so its tip
/// reaches `p_des` while the whole curve clears a circular obstacle, with
/// box bounds on the strains and the angular rate `u = phi'`. The obstacle
/// is enforced two ways: control points of `r^2 - ||p - O||^2` (sound via
/// the hull, exact product arithmetic) and the same quantity evaluated at
/// each position control point treated as a plane point.
pub fn example6(p: Ex6Params) -> Result<DaiProblem> {
    if p.k < 2 {
        return Err(Error::InvalidParameter("example 6 needs K >= 2".into()));
    }
    let knots = uniform_knots(0.0, p.length, p.k);
    let unknowns = vec![
        DaiUnknown {
            name: "phi".into(),
            param: Parameterization::Knot { m: 2 },
        },
        DaiUnknown {
            name: "nu1".into(),
            param: Parameterization::Knot { m: 1 },
        },
        DaiUnknown {
            name: "nu2".into(),
            param: Parameterization::Knot { m: 1 },
        },
    ];
    let dim = (p.k + 2) + (p.k + 1) + (p.k + 1);
    // Straight rod at nominal stretch: nu1 = 0.7 everywhere, all else 0.
    let mut initial_guess = vec![0.0; dim];
    initial_guess[(p.k + 2) + p.k] = 0.7;

    let p0 = p.p0;
    let p_des = p.p_des;
    let equalities = Box::new(move |ev: &DaiEval| -> Vec<f64> {
        let (px, py) = ex6_positions(ev, p0).expect("wired");
        let sf = *ev.knots().last().unwrap();
        vec![px.eval(sf) - p_des.0, py.eval(sf) - p_des.1]
    });

    let (nu1_lo, nu1_hi) = p.nu1_range;
    let (nu2_lo, nu2_hi) = p.nu2_range;
    let u_max = p.u_max;
    let obstacle = p.obstacle;
    let r_safe = p.r_safe;
    let inequalities = vec![
        InequalityBuilder {
            label: "nu1_upper".into(),
            build: Box::new(move |ev| Ok(ev.cbp("nu1", 0)?.offset(-nu1_hi))),
        },
        InequalityBuilder {
            label: "nu1_lower".into(),
            build: Box::new(move |ev| Ok(ev.cbp("nu1", 0)?.scale(-1.0).offset(nu1_lo))),
        },
        InequalityBuilder {
            label: "nu2_upper".into(),
            build: Box::new(move |ev| Ok(ev.cbp("nu2", 0)?.offset(-nu2_hi))),
        },
        InequalityBuilder {
            label: "nu2_lower".into(),
            build: Box::new(move |ev| Ok(ev.cbp("nu2", 0)?.scale(-1.0).offset(nu2_lo))),
        },
        InequalityBuilder {
            label: "u_upper".into(),
            build: Box::new(move |ev| Ok(ev.cbp("phi", 1)?.offset(-u_max))),
        },
        InequalityBuilder {
            label: "u_lower".into(),
            build: Box::new(move |ev| Ok(ev.cbp("phi", 1)?.scale(-1.0).offset(-u_max))),
        },
        InequalityBuilder {
            label: "obstacle_hull".into(),
            build: Box::new(move |ev| {
                let (px, py) = ex6_positions(ev, p0)?;
                let dx = px.offset(-obstacle.0);
                let dy = py.offset(-obstacle.1);
                let dist2 = dx.multiply(&dx)?.add(&dy.multiply(&dy)?)?;
                Ok(dist2.scale(-1.0).offset(r_safe * r_safe))
            }),
        },
        InequalityBuilder {
            label: "obstacle_cp".into(),
            build: Box::new(move |ev| {
                let (px, py) = ex6_positions(ev, p0)?;
                let segments = px
                    .segments()
                    .iter()
                    .zip(py.segments())
                    .map(|(sx, sy)| {
                        sx.iter()
                            .zip(sy)
                            .map(|(&cx, &cy)| {
                                let dx = cx - obstacle.0;
                                let dy = cy - obstacle.1;
                                r_safe * r_safe - dx * dx - dy * dy
                            })
                            .collect()
                    })
                    .collect();
                CompositeBernstein::new(px.knots().to_vec(), px.degree(), segments)
            }),
        },
    ];

    Ok(DaiProblem {
        name: "planar_rod_obstacle".into(),
        knots,
        unknowns,
        equalities,
        inequalities,
        initial_guess,
    })
}
