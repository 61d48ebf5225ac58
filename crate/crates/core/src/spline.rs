use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Natural cubic spline through `(x_i, y_i)`, zero second derivative at the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// second derivatives at the knots
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
        }
        if x.len() < 2 {
            return Err(Error::invalid("knots", "need at least two knots"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("knots", "abscissae must be strictly increasing"));
        }
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for interior second derivatives (Thomas algorithm)
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let h0 = x[i + 1] - x[i];
                let h1 = x[i + 2] - x[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(NaturalCubicSpline { x, y, m })
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.support();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfSupport { f: t, lo, hi });
        }
        Ok(match self.x.iter().position(|&xi| xi > t) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => self.x.len() - 2,
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let i = self.segment(t)?;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        Ok(a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0)
    }

    pub fn second_derivative(&self, t: f64) -> Result<f64> {
        let i = self.segment(t)?;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        Ok(a * self.m[i] + b * self.m[i + 1])
    }
}
