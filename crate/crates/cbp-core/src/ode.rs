//! Problem description for an explicit r-th order scalar ODE
//! `x^(r) = f(s, x, x', ..., x^(r-1))` with `r` linear two-point conditions,
//! plus an optional override for nodes where the right-hand side is
//! singular but the residual has a finite limit.

use crate::bernstein::Interval;

/// Right-hand side: `(s, derivs)` with `derivs = [x, x', ..., x^(r-1)]`.
pub type RhsFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;

/// Residual form: `(s, derivs)` with `derivs = [x, x', ..., x^(r)]`
/// (note: one entry more than `RhsFn` — the top derivative is included).
pub type ResidualFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;

/// One linear two-point condition:
/// `sum_l left[l] * x^(l)(s0) + right[l] * x^(l)(sf) = value`,
/// with `l` running over `0 .. r-1`.
#[derive(Debug, Clone)]
pub struct Condition {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub value: f64,
}

impl Condition {
    /// Pure initial condition `x^(level)(s0) = value`.
    pub fn initial(order: usize, level: usize, value: f64) -> Condition {
        let mut left = vec![0.0; order];
        left[level] = 1.0;
        Condition {
            left,
            right: vec![0.0; order],
            value,
        }
    }

    /// Pure terminal condition `x^(level)(sf) = value`.
    pub fn terminal(order: usize, level: usize, value: f64) -> Condition {
        let mut right = vec![0.0; order];
        right[level] = 1.0;
        Condition {
            left: vec![0.0; order],
            right,
            value,
        }
    }

    pub fn involves_right_endpoint(&self) -> bool {
        self.right.iter().any(|&c| c != 0.0)
    }
}

/// Replacement residual at nodes where the raw right-hand side cannot be
/// evaluated (e.g. a removable `1/s` singularity at the left endpoint).
/// `matches` flags the nodes; `residual` is the finite limit form taking
/// all derivatives `x, ..., x^(r)`.
pub struct SingularOverride {
    pub matches: Box<dyn Fn(f64) -> bool + Send + Sync>,
    pub residual: Box<ResidualFn>,
}

/// An r-th order problem over a fixed domain.
pub struct OdeProblem {
    pub name: String,
    pub order: usize,
    pub domain: Interval,
    pub rhs: Box<RhsFn>,
    pub conditions: Vec<Condition>,
    pub singular_override: Option<SingularOverride>,
    /// Known closed-form solution, when available (used for error sweeps).
    pub exact: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl OdeProblem {
    /// Collocation residual at `s`: `x^(r) - f(s, x, ..., x^(r-1))`, or the
    /// override's finite form where the raw right-hand side is singular.
    /// `derivs` holds `[x, x', ..., x^(r)]`.
    pub fn residual_at(&self, s: f64, derivs: &[f64]) -> f64 {
        debug_assert_eq!(derivs.len(), self.order + 1);
        if let Some(ov) = &self.singular_override {
            if (ov.matches)(s) {
                return (ov.residual)(s, derivs);
            }
        }
        derivs[self.order] - (self.rhs)(s, &derivs[..self.order])
    }

    /// True when every condition references only the left endpoint.
    pub fn is_initial_value_problem(&self) -> bool {
        self.conditions.iter().all(|c| !c.involves_right_endpoint())
    }

    /// Value of `x(s0)` if some condition pins it directly; used to seed
    /// solver iterates.
    pub fn left_value_hint(&self) -> Option<f64> {
        self.conditions.iter().find_map(|c| {
            let pins_left_value = c.left.first() == Some(&1.0)
                && c.left[1..].iter().all(|&v| v == 0.0)
                && c.right.iter().all(|&v| v == 0.0);
            pins_left_value.then_some(c.value)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_problem() -> OdeProblem {
        OdeProblem {
            name: "toy".into(),
            order: 2,
            domain: Interval::new(0.0, 1.0).unwrap(),
            rhs: Box::new(|_s, d| -d[0]),
            conditions: vec![
                Condition::initial(2, 0, 3.0),
                Condition::initial(2, 1, 0.0),
            ],
            singular_override: None,
            exact: None,
        }
    }

    #[test]
    fn residual_is_top_derivative_minus_rhs() {
        let p = toy_problem();
        // x'' + x at (x, x', x'') = (2, 5, -1): residual -1 - (-2) = 1.
        assert_eq!(p.residual_at(0.3, &[2.0, 5.0, -1.0]), 1.0);
    }

    #[test]
    fn override_takes_effect_only_at_flagged_nodes() {
        let mut p = toy_problem();
        p.singular_override = Some(SingularOverride {
            matches: Box::new(|s| s == 0.0),
            residual: Box::new(|_s, d| d[2] + 42.0),
        });
        assert_eq!(p.residual_at(0.0, &[2.0, 5.0, -1.0]), 41.0);
        assert_eq!(p.residual_at(0.5, &[2.0, 5.0, -1.0]), 1.0);
    }

    #[test]
    fn ivp_detection_and_left_value_hint() {
        let p = toy_problem();
        assert!(p.is_initial_value_problem());
        assert_eq!(p.left_value_hint(), Some(3.0));

        let mut bvp = toy_problem();
        bvp.conditions[1] = Condition::terminal(2, 0, 0.0);
        assert!(!bvp.is_initial_value_problem());
        assert_eq!(bvp.left_value_hint(), Some(3.0));
    }
}
