//! Solve reports shared by both collocation methods. The JSON shape is
//! part of the CLI contract: `method` plus the method's size parameter
//! (`n` for control-point collocation, `M` for knot collocation), then
//! `K`, `iterations`, `residual_inf`, `runtime_ms`, `converged`.

use serde::ser::{Serialize, SerializeStruct, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Control-point collocation with per-segment degree `n`.
    Cp { n: usize },
    /// Knot collocation with integration depth `m` (highest derivative
    /// order represented, written `M` externally).
    Knot { m: usize },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Cp { .. } => "cp",
            Method::Knot { .. } => "knot",
        }
    }

    /// The method's size parameter (`n` or `M`).
    pub fn size_param(&self) -> usize {
        match *self {
            Method::Cp { n } => n,
            Method::Knot { m } => m,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub method: Method,
    pub k: usize,
    pub unknowns: usize,
    pub iterations: usize,
    pub residual_inf: f64,
    pub runtime_ms: f64,
    pub converged: bool,
}

impl Serialize for SolveReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SolveReport", 7)?;
        s.serialize_field("method", self.method.name())?;
        match self.method {
            Method::Cp { n } => s.serialize_field("n", &n)?,
            Method::Knot { m } => s.serialize_field("M", &m)?,
        }
        s.serialize_field("K", &self.k)?;
        s.serialize_field("iterations", &self.iterations)?;
        s.serialize_field("residual_inf", &self.residual_inf)?;
        s.serialize_field("runtime_ms", &self.runtime_ms)?;
        s.serialize_field("converged", &self.converged)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cp_report_serializes_with_n_field() {
        let r = SolveReport {
            method: Method::Cp { n: 4 },
            k: 8,
            unknowns: 40,
            iterations: 3,
            residual_inf: 1e-12,
            runtime_ms: 2.5,
            converged: true,
        };
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.starts_with(r#"{"method":"cp","n":4,"K":8,"#), "{json}");
        assert!(json.contains(r#""converged":true"#));
        assert!(!json.contains("unknowns"));
    }

    #[test]
    fn knot_report_serializes_with_m_field() {
        let r = SolveReport {
            method: Method::Knot { m: 3 },
            k: 5,
            unknowns: 8,
            iterations: 4,
            residual_inf: 2e-11,
            runtime_ms: 0.7,
            converged: true,
        };
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.starts_with(r#"{"method":"knot","M":3,"K":5,"#), "{json}");
    }
}
