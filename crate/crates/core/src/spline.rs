//! Natural cubic spline interpolation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Natural cubic spline (zero second derivative at both ends).
#[derive(Debug, Clone)]
pub struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    /// Fits a spline through `(xs[i], ys[i])`. Knots must be strictly increasing;
    /// two knots give the straight line through them.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        let n = xs.len();
        if n < 2 {
            return Err(Error::DegenerateInput { len: n, min: 2 });
        }
        if xs
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(core::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidConfig(
                "spline knots must be strictly increasing",
            ));
        }

        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives, Thomas algorithm.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            for j in 1..k {
                // Sub-diagonal entry of row j is h_j = xs[j+1] - xs[j].
                let lower = xs[j + 1] - xs[j];
                let w = lower / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for j in (0..k - 1).rev() {
                m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
            }
        }
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        })
    }

    fn eval_segment(&self, seg: usize, x: f64) -> f64 {
        let (x0, x1) = (self.xs[seg], self.xs[seg + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.ys[seg]
            + b * self.ys[seg + 1]
            + ((a * a * a - a) * self.m[seg] + (b * b * b - b) * self.m[seg + 1]) * h * h / 6.0
    }

    /// Value at `x`; outside the knot range the end cubics are extended.
    pub fn eval(&self, x: f64) -> f64 {
        let last = self.xs.len() - 2;
        let seg = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p => (p - 1).min(last),
        };
        self.eval_segment(seg, x)
    }

    /// Values at the integer positions `0..n`, in one forward sweep.
    pub fn eval_grid(&self, n: usize) -> Vec<f64> {
        let last = self.xs.len() - 2;
        let mut seg = 0;
        (0..n)
            .map(|i| {
                let x = i as f64;
                while seg < last && self.xs[seg + 1] <= x {
                    seg += 1;
                }
                self.eval_segment(seg, x)
            })
            .collect()
    }
}
