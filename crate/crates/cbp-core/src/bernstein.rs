//! Bernstein polynomials on a single interval `[s0, sf]`: evaluation via
//! de Casteljau, differentiation / antidifferentiation / degree elevation as
//! control-point maps, products by coefficient convolution, and the convex
//! hull bound that makes control points usable as certificates.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Largest degree for which binomial coefficients are computed. `C(60, 30)`
/// is near the top of the exactly-representable range; beyond that the
/// coefficient arithmetic silently loses the digits the hull bounds rely on.
pub const MAX_BINOMIAL_N: usize = 60;

/// Binomial coefficient `C(n, k)` by the multiplicative recurrence.
/// Returns `0` for `k > n`; rejects `n > 60`.
pub fn binomial(n: usize, k: usize) -> Result<f64> {
    if n > MAX_BINOMIAL_N {
        return Err(Error::DegreeTooLarge { n });
    }
    if k > n {
        return Ok(0.0);
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    Ok(c)
}

/// Closed interval `[s0, sf]` with `s0 < sf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    s0: f64,
    sf: f64,
}

impl Interval {
    pub fn new(s0: f64, sf: f64) -> Result<Self> {
        if s0 >= sf || !s0.is_finite() || !sf.is_finite() {
            return Err(Error::InvalidInterval { s0, sf });
        }
        Ok(Interval { s0, sf })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn sf(&self) -> f64 {
        self.sf
    }

    pub fn len(&self) -> f64 {
        self.sf - self.s0
    }

    /// Affine map of `s` to the unit parameter `t = (s - s0) / (sf - s0)`.
    pub fn to_unit(&self, s: f64) -> f64 {
        (s - self.s0) / (self.sf - self.s0)
    }
}

/// Value of the degree-`n` Bernstein basis function `i` at `s`.
pub fn basis_value(n: usize, i: usize, s: f64, interval: Interval) -> Result<f64> {
    if i > n {
        return Err(Error::InvalidParameter(format!(
            "basis index {i} out of range for degree {n}"
        )));
    }
    let t = interval.to_unit(s);
    Ok(binomial(n, i)? * t.powi(i as i32) * (1.0 - t).powi((n - i) as i32))
}

/// Polynomial in Bernstein form: `p(s) = sum_i cps[i] * B_i^n(s)` on `interval`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinPoly {
    interval: Interval,
    cps: Vec<f64>,
}

impl BernsteinPoly {
    pub fn new(interval: Interval, cps: Vec<f64>) -> Result<Self> {
        if cps.is_empty() {
            return Err(Error::InvalidParameter(
                "a Bernstein polynomial needs at least one control point".into(),
            ));
        }
        Ok(BernsteinPoly { interval, cps })
    }

    pub fn degree(&self) -> usize {
        self.cps.len() - 1
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn cps(&self) -> &[f64] {
        &self.cps
    }

    /// Evaluate by de Casteljau's recurrence: numerically stable for all
    /// `t` in `[0, 1]` and exact at the endpoints.
    pub fn eval(&self, s: f64) -> f64 {
        let t = self.interval.to_unit(s);
        let mut beta = self.cps.clone();
        let n = self.degree();
        for level in 1..=n {
            for i in 0..=(n - level) {
                beta[i] = beta[i] * (1.0 - t) + beta[i + 1] * t;
            }
        }
        beta[0]
    }

    /// Derivative in Bernstein form (degree drops by one).
    pub fn derivative(&self) -> Result<BernsteinPoly> {
        let n = self.degree();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "cannot take the Bernstein-form derivative of a degree-0 polynomial".into(),
            ));
        }
        let scale = n as f64 / self.interval.len();
        let cps = (0..n)
            .map(|j| scale * (self.cps[j + 1] - self.cps[j]))
            .collect();
        BernsteinPoly::new(self.interval, cps)
    }

    /// Antiderivative in Bernstein form (degree rises by one) with value
    /// `left_value` at the left endpoint.
    pub fn antiderivative(&self, left_value: f64) -> BernsteinPoly {
        let n = self.degree();
        let step = self.interval.len() / (n + 1) as f64;
        let mut cps = Vec::with_capacity(n + 2);
        cps.push(left_value);
        for j in 0..=n {
            cps.push(cps[j] + step * self.cps[j]);
        }
        BernsteinPoly {
            interval: self.interval,
            cps,
        }
    }

    /// The same polynomial re-expressed at a higher degree `ne`.
    pub fn elevate(&self, ne: usize) -> Result<BernsteinPoly> {
        let n = self.degree();
        if ne < n {
            return Err(Error::InvalidParameter(format!(
                "cannot elevate degree {n} down to {ne}"
            )));
        }
        let e = elevation_matrix(n, ne)?;
        BernsteinPoly::new(self.interval, e.vecmat(&self.cps)?)
    }

    /// Exact product; the result has degree `m + n` on the same interval.
    pub fn multiply(&self, other: &BernsteinPoly) -> Result<BernsteinPoly> {
        if self.interval != other.interval {
            return Err(Error::Dimension(
                "product requires both factors on the same interval".into(),
            ));
        }
        let m = self.degree();
        let n = other.degree();
        let mut cps = vec![0.0; m + n + 1];
        for (k, cp) in cps.iter_mut().enumerate() {
            let mut acc = 0.0;
            let j_lo = k.saturating_sub(n);
            let j_hi = k.min(m);
            for j in j_lo..=j_hi {
                acc += binomial(m, j)? * binomial(n, k - j)? * self.cps[j] * other.cps[k - j];
            }
            *cp = acc / binomial(m + n, k)?;
        }
        BernsteinPoly::new(self.interval, cps)
    }

    /// Coefficient-wise sum; requires matching degree and interval.
    pub fn add(&self, other: &BernsteinPoly) -> Result<BernsteinPoly> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Coefficient-wise difference; requires matching degree and interval.
    pub fn sub(&self, other: &BernsteinPoly) -> Result<BernsteinPoly> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &BernsteinPoly, f: impl Fn(f64, f64) -> f64) -> Result<BernsteinPoly> {
        if self.interval != other.interval || self.degree() != other.degree() {
            return Err(Error::Dimension(
                "coefficient-wise ops require matching degree and interval".into(),
            ));
        }
        let cps = self
            .cps
            .iter()
            .zip(&other.cps)
            .map(|(&a, &b)| f(a, b))
            .collect();
        BernsteinPoly::new(self.interval, cps)
    }

    pub fn scale(&self, k: f64) -> BernsteinPoly {
        BernsteinPoly {
            interval: self.interval,
            cps: self.cps.iter().map(|c| c * k).collect(),
        }
    }

    /// `(min, max)` over the control points. By convexity the polynomial's
    /// range on the interval is contained in these bounds, which is what
    /// turns control-point checks into sound inequality certificates.
    pub fn hull_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &c in &self.cps {
            lo = lo.min(c);
            hi = hi.max(c);
        }
        (lo, hi)
    }
}

/// Differentiation as a control-point map: for row-vector control points
/// `b` of degree `n`, `b * delta` gives the degree-`n-1` derivative control
/// points. Shape `(n+1) x n`, bidiagonal, scaled by `n / (sf - s0)`.
pub fn delta_matrix(n: usize, interval: Interval) -> DenseMatrix {
    let mut d = DenseMatrix::zeros(n + 1, n);
    let scale = n as f64 / interval.len();
    for j in 0..n {
        d[(j, j)] = -scale;
        d[(j + 1, j)] = scale;
    }
    d
}

/// Antidifferentiation as a control-point map: `b * gamma` gives the
/// degree-`n+1` antiderivative control points *with zero left value*; the
/// caller adds the left value to every entry. Shape `(n+1) x (n+2)`,
/// strictly upper triangular, scaled by `(sf - s0) / (n + 1)`.
pub fn gamma_matrix(n: usize, interval: Interval) -> DenseMatrix {
    let mut g = DenseMatrix::zeros(n + 1, n + 2);
    let scale = interval.len() / (n + 1) as f64;
    for i in 0..=n {
        for j in i + 1..n + 2 {
            g[(i, j)] = scale;
        }
    }
    g
}

/// Degree elevation as a control-point map from degree `n` to `ne >= n`:
/// shape `(n+1) x (ne+1)` with `E[i, i+j] = C(ne-n, j) C(n, i) / C(ne, i+j)`.
pub fn elevation_matrix(n: usize, ne: usize) -> Result<DenseMatrix> {
    if ne < n {
        return Err(Error::InvalidParameter(format!(
            "elevation target degree {ne} below source degree {n}"
        )));
    }
    let mut e = DenseMatrix::zeros(n + 1, ne + 1);
    for i in 0..=n {
        for j in 0..=(ne - n) {
            e[(i, i + j)] = binomial(ne - n, j)? * binomial(n, i)? / binomial(ne, i + j)?;
        }
    }
    Ok(e)
}

/// Degree-preserving differentiation map `D = delta * E`: `b * D` gives the
/// derivative's control points re-elevated to degree `n`, so powers of `D`
/// express repeated differentiation without changing vector length.
pub fn d_matrix(n: usize, interval: Interval) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "degree-preserving derivative needs degree >= 1".into(),
        ));
    }
    delta_matrix(n, interval).matmul(&elevation_matrix(n - 1, n)?)
}
