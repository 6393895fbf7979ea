//! Piecewise-cubic interpolants on strictly increasing abscissae.

use crate::error::{Error, Result};

fn check_nodes(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid(
            "nodes",
            format!("length mismatch: {} abscissae, {} ordinates", x.len(), y.len()),
        ));
    }
    if x.len() < 3 {
        return Err(Error::invalid("nodes", "at least 3 nodes are required"));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("nodes", "abscissae must be strictly increasing"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("nodes", "non-finite value"));
    }
    Ok(())
}

/// Index `i` of the cell `[x[i], x[i+1]]` containing `t` (clamped to the end cells).
pub(crate) fn locate(x: &[f64], t: f64) -> usize {
    let n = x.len();
    match x.binary_search_by(|v| v.total_cmp(&t)) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    }
}

/// Natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the nodes
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_nodes(&x, &y)?;
        let n = x.len();
        let mut m = vec![0.0; n];
        // tridiagonal system for interior second derivatives (Thomas algorithm)
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let lower = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            if i > 1 {
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
        }
        for i in (1..n - 1).rev() {
            let next = if i + 1 < n - 1 { m[i + 1] } else { 0.0 };
            m[i] = (rhs[i] - upper[i] * next) / diag[i];
        }
        Ok(Self { x, y, m })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Value and first three derivatives at `t`.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let i = locate(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        let d3 = (m1 - m0) / h;
        [v, d1, d2, d3]
    }

    /// Cumulative integral from the first node to every node.
    pub fn cumulative_integral(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.x.len());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..self.x.len() - 1 {
            let h = self.x[i + 1] - self.x[i];
            acc += 0.5 * h * (self.y[i] + self.y[i + 1]) - h * h * h * (self.m[i] + self.m[i + 1]) / 24.0;
            out.push(acc);
        }
        out
    }
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// slopes with the weighted harmonic mean used by PCHIP).
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_nodes(&x, &y)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Ok(Self { x, y, d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value and first derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let i = locate(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i], self.d[i + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dh00 = 6.0 * s * (s - 1.0);
        let dh10 = (1.0 - s) * (1.0 - 3.0 * s);
        let dh01 = -6.0 * s * (s - 1.0);
        let dh11 = s * (3.0 * s - 2.0);
        let dv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
        (v, dv)
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Piecewise-linear interpolation (clamped extrapolation uses the end cells).
pub fn linear(x: &[f64], y: &[f64], t: f64) -> f64 {
    let i = locate(x, t);
    let s = (t - x[i]) / (x[i + 1] - x[i]);
    y[i] + s * (y[i + 1] - y[i])
}
