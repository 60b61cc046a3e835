//! Cubic spline interpolation in the second-derivative (moment) form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise cubic interpolant stored as knots, values and the second
/// derivative at every knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second_derivs: Vec<f64>,
}

impl CubicSpline {
    pub const MIN_KNOTS: usize = 4;

    /// Natural spline (zero second derivative at both ends).
    pub fn natural(knots: &[f64], values: &[f64]) -> Result<Self> {
        Self::with_end_curvature(knots, values, 0.0, 0.0)
    }

    /// Spline with prescribed second derivatives at the two end knots.
    pub fn with_end_curvature(knots: &[f64], values: &[f64], first: f64, last: f64) -> Result<Self> {
        let n = knots.len();
        if n < Self::MIN_KNOTS || values.len() != n {
            return Err(Error::TooFewKnots { needed: Self::MIN_KNOTS, got: n.min(values.len()) });
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InconsistentBounds("spline knots must be strictly increasing".into()));
        }

        // Tridiagonal system for interior moments, Thomas algorithm.
        let mut m = vec![0.0; n];
        m[0] = first;
        m[n - 1] = last;
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let interior = n - 2;
        let mut diag = vec![0.0; interior];
        let mut upper = vec![0.0; interior];
        let mut rhs = vec![0.0; interior];
        for k in 0..interior {
            let i = k + 1;
            diag[k] = 2.0 * (h[i - 1] + h[i]);
            upper[k] = h[i];
            rhs[k] = 6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
        }
        rhs[0] -= h[0] * first;
        rhs[interior - 1] -= h[n - 2] * last;
        for k in 1..interior {
            let lower = h[k];
            let w = lower / diag[k - 1];
            diag[k] -= w * upper[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        m[interior] = rhs[interior - 1] / diag[interior - 1];
        for k in (0..interior - 1).rev() {
            m[k + 1] = (rhs[k] - upper[k] * m[k + 2]) / diag[k];
        }

        Ok(CubicSpline { knots: knots.to_vec(), values: values.to_vec(), second_derivs: m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn second_derivs(&self) -> &[f64] {
        &self.second_derivs
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        // last interval is closed on the right
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i.clamp(1, self.knots.len() - 1) - 1,
        };
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second_derivs[i], self.second_derivs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        Ok(a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0)
    }

    /// First derivative; used for smoothness checks.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        let i = self.knots.partition_point(|&k| k <= x).clamp(1, self.knots.len() - 1) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = (x - self.knots[i]) / h;
        let (m0, m1) = (self.second_derivs[i], self.second_derivs[i + 1]);
        Ok((self.values[i + 1] - self.values[i]) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0
            + (3.0 * b * b - 1.0) * h * m1 / 6.0)
    }
}
