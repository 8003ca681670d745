//! Composite Bernstein polynomial (CBP) collocation for nonlinear ordinary
//! differential equations and differential algebraic inequalities.
//!
//! The crate provides two collocation strategies over a shared Bernstein
//! toolbox:
//!
//! * **Control-point collocation** (`cp_collocation`): the unknowns are the
//!   flattened control points of a degree-`n` composite; derivatives enter
//!   through degree-preserving differentiation matrices and continuity is
//!   imposed explicitly.
//! * **Knot collocation** (`knot_collocation`): the unknowns are the
//!   per-segment constants of the highest derivative plus the initial
//!   values; everything else is reconstructed by exact antidifferentiation,
//!   so continuity is structural and the system stays small (`K + M`
//!   unknowns).
//!
//! Inequality constraints (`dai`) are enforced through the convex-hull
//! property: if every control point of a constraint composite is below
//! zero, the constraint holds everywhere on the domain.

pub mod bernstein;
pub mod composite;
pub mod cp_collocation;
pub mod dai;
pub mod error;
pub mod knot_collocation;
pub mod matrix;
pub mod ode;
pub mod registry;
pub mod report;
pub mod solver;

pub use bernstein::{BernsteinPoly, Interval};
pub use composite::CompositeBernstein;
pub use error::{Error, Result};
