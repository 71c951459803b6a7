use std::path::Path;

use crate::error::{Error, Result};

/// Piecewise-linear function on strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Table {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput("table columns differ in length".into()));
        }
        if x.len() < 2 {
            return Err(Error::InvalidInput("table needs at least two rows".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("table contains non-finite values".into()));
        }
        if let Some(k) = x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!("table abscissae not strictly increasing at row {}", k + 2)));
        }
        Ok(Self { x, y })
    }

    /// Two whitespace- or comma-separated columns; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::InvalidInput(format!("line {}: `{s}` is not a number", n + 1)));
            match cols.as_slice() {
                [a, b] => {
                    x.push(parse(a)?);
                    y.push(parse(b)?);
                }
                _ => return Err(Error::InvalidInput(format!("line {}: expected two columns", n + 1))),
            }
        }
        Self::new(x, y)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn ys(&self) -> &[f64] {
        &self.y
    }

    pub fn first_x(&self) -> f64 {
        self.x[0]
    }

    pub fn last_x(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Index `k` with `x[k] <= v < x[k+1]`, clamped to the table.
    pub fn segment(&self, v: f64) -> usize {
        let k = self.x.partition_point(|&xk| xk <= v);
        k.saturating_sub(1).min(self.x.len() - 2)
    }

    /// Linear interpolation, constant extrapolation outside the table.
    pub fn eval(&self, v: f64) -> f64 {
        if v <= self.x[0] {
            return self.y[0];
        }
        if v >= self.last_x() {
            return self.y[self.y.len() - 1];
        }
        let k = self.segment(v);
        let w = (v - self.x[k]) / (self.x[k + 1] - self.x[k]);
        self.y[k] + w * (self.y[k + 1] - self.y[k])
    }

    /// Slope of the segment containing `v`.
    pub fn slope(&self, v: f64) -> f64 {
        let k = self.segment(v);
        (self.y[k + 1] - self.y[k]) / (self.x[k + 1] - self.x[k])
    }

    /// One-sided second-order derivative at the left end.
    pub fn left_derivative(&self) -> f64 {
        if self.x.len() < 3 {
            return self.slope(self.x[0]);
        }
        let (x0, x1, x2) = (self.x[0], self.x[1], self.x[2]);
        let (h1, h2) = (x1 - x0, x2 - x0);
        // Derivative at x0 of the quadratic through the first three rows.
        let c1 = -(h1 + h2) / (h1 * h2);
        let c2 = h2 / (h1 * (h2 - h1));
        let c3 = -h1 / (h2 * (h2 - h1));
        c1 * self.y[0] + c2 * self.y[1] + c3 * self.y[2]
    }

    /// Exact integral of the interpolant over `[x_0, v]`.
    pub fn integral_to(&self, v: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.x.len() - 1 {
            let (a, b) = (self.x[k], self.x[k + 1]);
            if v <= a {
                break;
            }
            let e = v.min(b);
            acc += 0.5 * (e - a) * (self.y[k] + self.eval(e));
        }
        if v > self.last_x() {
            acc += (v - self.last_x()) * self.y[self.y.len() - 1];
        }
        acc
    }

    pub fn sup_abs(&self) -> f64 {
        self.y.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
