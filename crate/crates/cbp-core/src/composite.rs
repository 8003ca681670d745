//! Composite Bernstein polynomials: a strictly increasing knot vector
//! splitting `[s0, sf]` into `K` segments, each carrying a degree-`n`
//! Bernstein polynomial. Continuity across knots is a property of how a
//! composite is built (sampling, antidifferentiation, collocation), not of
//! the container itself.

use serde::{Deserialize, Deserializer, Serialize};

use crate::bernstein::{BernsteinPoly, Interval};
use crate::error::{Error, Result};

/// Piecewise polynomial in Bernstein form. Serializes as
/// `{"knots": [...], "degree": n, "segments": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeBernstein {
    knots: Vec<f64>,
    degree: usize,
    segments: Vec<Vec<f64>>,
}

pub fn validate_knots(knots: &[f64]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::InvalidKnots(format!(
            "need at least 2 knots, got {}",
            knots.len()
        )));
    }
    if knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidKnots("knots must be finite".into()));
    }
    if knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidKnots(
            "knots must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `count + 1` equally spaced knots over `[s0, sf]`.
pub fn uniform_knots(s0: f64, sf: f64, count: usize) -> Vec<f64> {
    let h = (sf - s0) / count as f64;
    let mut knots: Vec<f64> = (0..=count).map(|i| s0 + i as f64 * h).collect();
    knots[count] = sf;
    knots
}

impl CompositeBernstein {
    pub fn new(knots: Vec<f64>, degree: usize, segments: Vec<Vec<f64>>) -> Result<Self> {
        validate_knots(&knots)?;
        if segments.len() != knots.len() - 1 {
            return Err(Error::Dimension(format!(
                "{} knots imply {} segments, got {}",
                knots.len(),
                knots.len() - 1,
                segments.len()
            )));
        }
        if segments.iter().any(|s| s.len() != degree + 1) {
            return Err(Error::Dimension(format!(
                "every segment needs {} control points for degree {}",
                degree + 1,
                degree
            )));
        }
        Ok(CompositeBernstein {
            knots,
            degree,
            segments,
        })
    }

    /// Rebuild from a flat control-point vector of length `K * (degree + 1)`,
    /// segment-major.
    pub fn from_flat(knots: Vec<f64>, degree: usize, flat: &[f64]) -> Result<Self> {
        validate_knots(&knots)?;
        let k = knots.len() - 1;
        let per = degree + 1;
        if flat.len() != k * per {
            return Err(Error::Dimension(format!(
                "flat control vector length {} != K(n+1) = {}",
                flat.len(),
                k * per
            )));
        }
        let segments = flat.chunks(per).map(<[f64]>::to_vec).collect();
        CompositeBernstein::new(knots, degree, segments)
    }

    /// Sample a function at the per-segment equidistant nodes: control point
    /// `j` of segment `i` is `f(s_i + j * h_i / n)`. Cheap and convergent;
    /// by no means the best approximant but a useful starting point.
    pub fn from_samples(f: impl Fn(f64) -> f64, knots: &[f64], degree: usize) -> Result<Self> {
        validate_knots(knots)?;
        let segments = (0..knots.len() - 1)
            .map(|i| {
                segment_nodes(knots[i], knots[i + 1], degree)
                    .map(&f)
                    .collect()
            })
            .collect();
        CompositeBernstein::new(knots.to_vec(), degree, segments)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn segments(&self) -> &[Vec<f64>] {
        &self.segments
    }

    /// Number of segments `K`.
    pub fn k(&self) -> usize {
        self.segments.len()
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.knots[0], *self.knots.last().unwrap())
            .expect("validated strictly increasing knots")
    }

    pub fn segment_interval(&self, i: usize) -> Interval {
        Interval::new(self.knots[i], self.knots[i + 1]).expect("validated knots")
    }

    fn segment_poly(&self, i: usize) -> BernsteinPoly {
        BernsteinPoly::new(self.segment_interval(i), self.segments[i].clone())
            .expect("validated segment")
    }

    /// Segment owning `s`; interior knots belong to the segment on their
    /// right, so evaluation there uses the right segment's control points.
    pub fn segment_index(&self, s: f64) -> usize {
        let k = self.k();
        let interior = &self.knots[1..k];
        interior.partition_point(|&x| x <= s).min(k - 1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.segment_poly(self.segment_index(s)).eval(s)
    }

    /// Concatenated control points, segment-major: length `K * (degree + 1)`.
    pub fn flatten(&self) -> Vec<f64> {
        self.segments.concat()
    }

    /// Segment-wise derivative (degree drops by one; may be discontinuous
    /// at the knots).
    pub fn derivative(&self) -> Result<CompositeBernstein> {
        let segments: Result<Vec<Vec<f64>>> = (0..self.k())
            .map(|i| Ok(self.segment_poly(i).derivative()?.cps().to_vec()))
            .collect();
        CompositeBernstein::new(self.knots.clone(), self.degree - 1, segments?)
    }

    /// Antiderivative with value `left_value` at the left domain endpoint;
    /// each segment starts where the previous one ended, so the result is
    /// continuous by construction.
    pub fn antiderivative(&self, left_value: f64) -> CompositeBernstein {
        let mut left = left_value;
        let mut segments = Vec::with_capacity(self.k());
        for i in 0..self.k() {
            let seg = self.segment_poly(i).antiderivative(left);
            left = *seg.cps().last().unwrap();
            segments.push(seg.cps().to_vec());
        }
        CompositeBernstein {
            knots: self.knots.clone(),
            degree: self.degree + 1,
            segments,
        }
    }

    /// Segment-wise degree elevation to `ne`.
    pub fn elevate(&self, ne: usize) -> Result<CompositeBernstein> {
        let segments: Result<Vec<Vec<f64>>> = (0..self.k())
            .map(|i| Ok(self.segment_poly(i).elevate(ne)?.cps().to_vec()))
            .collect();
        CompositeBernstein::new(self.knots.clone(), ne, segments?)
    }

    /// Segment-wise exact product; requires identical knot vectors.
    pub fn multiply(&self, other: &CompositeBernstein) -> Result<CompositeBernstein> {
        self.check_same_knots(other)?;
        let segments: Result<Vec<Vec<f64>>> = (0..self.k())
            .map(|i| {
                Ok(self
                    .segment_poly(i)
                    .multiply(&other.segment_poly(i))?
                    .cps()
                    .to_vec())
            })
            .collect();
        CompositeBernstein::new(self.knots.clone(), self.degree + other.degree, segments?)
    }

    /// Control-point-wise sum; requires identical knots and degree.
    pub fn add(&self, other: &CompositeBernstein) -> Result<CompositeBernstein> {
        self.check_same_knots(other)?;
        if self.degree != other.degree {
            return Err(Error::Dimension(format!(
                "degree mismatch: {} vs {}",
                self.degree, other.degree
            )));
        }
        let segments = self
            .segments
            .iter()
            .zip(&other.segments)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        CompositeBernstein::new(self.knots.clone(), self.degree, segments)
    }

    /// Control-point-wise difference; requires identical knots and degree.
    pub fn sub(&self, other: &CompositeBernstein) -> Result<CompositeBernstein> {
        self.check_same_knots(other)?;
        if self.degree != other.degree {
            return Err(Error::Dimension(format!(
                "degree mismatch: {} vs {}",
                self.degree, other.degree
            )));
        }
        let segments = self
            .segments
            .iter()
            .zip(&other.segments)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        CompositeBernstein::new(self.knots.clone(), self.degree, segments)
    }

    pub fn scale(&self, k: f64) -> CompositeBernstein {
        let segments = self
            .segments
            .iter()
            .map(|s| s.iter().map(|c| c * k).collect())
            .collect();
        CompositeBernstein {
            knots: self.knots.clone(),
            degree: self.degree,
            segments,
        }
    }

    /// Add a constant to every control point (shifts the function by `c`).
    pub fn offset(&self, c: f64) -> CompositeBernstein {
        let segments = self
            .segments
            .iter()
            .map(|s| s.iter().map(|v| v + c).collect())
            .collect();
        CompositeBernstein {
            knots: self.knots.clone(),
            degree: self.degree,
            segments,
        }
    }

    /// Global `(min, max)` over all control points; contains the function's
    /// range on the whole domain by segment-wise convexity.
    pub fn hull_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for seg in &self.segments {
            for &c in seg {
                lo = lo.min(c);
                hi = hi.max(c);
            }
        }
        (lo, hi)
    }

    /// Max absolute deviation from `f` over `samples` equally spaced points
    /// plus every knot.
    pub fn max_abs_error(&self, f: impl Fn(f64) -> f64, samples: usize) -> f64 {
        let iv = self.domain();
        let mut worst = 0.0f64;
        let denom = (samples.max(2) - 1) as f64;
        for j in 0..samples.max(2) {
            let s = iv.s0() + iv.len() * j as f64 / denom;
            worst = worst.max((self.eval(s) - f(s)).abs());
        }
        for &s in &self.knots {
            worst = worst.max((self.eval(s) - f(s)).abs());
        }
        worst
    }

    fn check_same_knots(&self, other: &CompositeBernstein) -> Result<()> {
        if self.knots != other.knots {
            return Err(Error::Dimension(
                "operation requires identical knot vectors".into(),
            ));
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for CompositeBernstein {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            knots: Vec<f64>,
            degree: usize,
            segments: Vec<Vec<f64>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        CompositeBernstein::new(raw.knots, raw.degree, raw.segments)
            .map_err(serde::de::Error::custom)
    }
}

/// The `n + 1` equidistant nodes of one segment, `s_i + j * h / n`.
pub fn segment_nodes(lo: f64, hi: f64, degree: usize) -> impl Iterator<Item = f64> {
    let h = hi - lo;
    (0..=degree).map(move |j| {
        if degree == 0 {
            lo
        } else {
            lo + h * j as f64 / degree as f64
        }
    })
}

/// Per-segment equidistant collocation nodes, segment-major: `K * (n + 1)`
/// values with interior knots appearing twice (once as a segment's last
/// node, once as the next segment's first).
pub fn collocation_grid(knots: &[f64], degree: usize) -> Result<Vec<f64>> {
    validate_knots(knots)?;
    let mut grid = Vec::with_capacity((knots.len() - 1) * (degree + 1));
    for i in 0..knots.len() - 1 {
        grid.extend(segment_nodes(knots[i], knots[i + 1], degree));
    }
    Ok(grid)
}
