//! Uniform time grids and the quadrature rules used by the integral system:
//! Simpson for smooth space integrals, product integration for
//! `(t - tau)^{-1/2}` histories, and fourth-order cumulative integrals.

use crate::error::{Error, Result};

/// Uniform grid on `[0, sigma]` with nodes `j h` and midpoints `(j + 1/2) h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub sigma: f64,
    pub n: usize,
}

impl TimeGrid {
    pub const MIN_NODES: usize = 8;

    pub fn new(sigma: f64, n: usize) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidInput(format!("time horizon must be positive, got {sigma}")));
        }
        if n < Self::MIN_NODES {
            return Err(Error::InvalidInput(format!("time grid needs at least {} intervals, got {n}", Self::MIN_NODES)));
        }
        Ok(Self { sigma, n })
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.sigma / self.n as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.h()
    }

    #[inline]
    pub fn mid(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h()
    }

    /// Time at half-index `k`: nodes are even, midpoints odd.
    #[inline]
    pub fn half(&self, k: usize) -> f64 {
        k as f64 * 0.5 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.node(j)).collect()
    }
}

/// `int (t - tau)^{-1/2} dtau` over a cell whose elapsed-time range is `[s1, s2]`.
#[inline]
pub fn abel_weight(s1: f64, s2: f64) -> f64 {
    2.0 * (s2.sqrt() - s1.sqrt())
}

/// Product-integration history sum up to node `i`.
///
/// The integrand is `psi(tau) / sqrt(t - tau)`; `psi` is sampled by
/// `psi(j)` at midpoint `j` and the singular factor is integrated exactly
/// over each cell. Returns 0 for `i == 0`.
pub fn integrate_singular_history<F: Fn(usize) -> f64>(grid: &TimeGrid, i: usize, psi: F) -> f64 {
    let t = grid.node(i);
    (0..i)
        .map(|j| psi(j) * abel_weight(t - grid.node(j + 1), t - grid.node(j)))
        .sum()
}

/// Same as [`integrate_singular_history`] with `psi = chi * kernel * sqrt(t - tau)`
/// assembled from a density at midpoints and a kernel callable `(t, tau)`.
pub fn integrate_kernel_history<K: Fn(f64, f64) -> f64>(grid: &TimeGrid, chi: &[f64], kernel: K, i: usize) -> f64 {
    let t = grid.node(i);
    integrate_singular_history(grid, i, |j| {
        let tau = grid.mid(j);
        chi[j] * kernel(t, tau) * (t - tau).sqrt()
    })
}

/// Composite Simpson over uniform samples with spacing `h`.
///
/// Odd sample counts use pure Simpson; even counts close the last panel with
/// a cubic (3/8) rule so the order stays four.
pub fn simpson_uniform(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (f[0] + f[1]),
        3 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        _ if n % 2 == 1 => {
            let mut acc = f[0] + f[n - 1];
            for (j, v) in f.iter().enumerate().take(n - 1).skip(1) {
                acc += if j % 2 == 1 { 4.0 } else { 2.0 } * v;
            }
            acc * h / 3.0
        }
        _ => {
            let head = simpson_uniform(&f[..n - 3], h);
            let t = &f[n - 4..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

/// Composite Simpson on sorted abscissae; uniform spacing is required for
/// fourth order, non-uniform input falls back to the trapezoid rule.
pub fn integrate_space(x: &[f64], f: &[f64]) -> Result<f64> {
    if x.len() != f.len() {
        return Err(Error::InvalidInput("abscissa and value lengths differ".into()));
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput("space integral needs at least 3 samples".into()));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("abscissae must be strictly increasing".into()));
    }
    let n = x.len();
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    let uniform = x.iter().enumerate().all(|(j, &xj)| (xj - (x[0] + j as f64 * h)).abs() <= 1e-9 * h.max(x[0].abs()));
    if uniform {
        Ok(simpson_uniform(f, h))
    } else {
        Ok(x.windows(2).zip(f.windows(2)).map(|(xw, fw)| 0.5 * (xw[1] - xw[0]) * (fw[0] + fw[1])).sum())
    }
}

/// Cumulative integral `int_{x_0}^{x_j} f` on a uniform grid, fourth order.
///
/// Each cell uses the cubic through the four nearest samples.
pub fn cumulative_uniform(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 4 {
        for j in 1..n {
            out[j] = out[j - 1] + 0.5 * h * (f[j - 1] + f[j]);
        }
        return out;
    }
    let c = h / 24.0;
    for j in 1..n {
        let a = j - 1;
        let cell = if a == 0 {
            c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if a + 2 >= n {
            c * (9.0 * f[a + 1] + 19.0 * f[a] - 5.0 * f[a - 1] + f[a - 2])
        } else {
            c * (-f[a - 1] + 13.0 * f[a] + 13.0 * f[a + 1] - f[a + 2])
        };
        out[j] = out[a] + cell;
    }
    out
}

/// Nodes and weights of 8-point Gauss-Legendre on `[-1, 1]`.
pub const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// 8-point Gauss-Legendre on `[a, b]`.
pub fn gauss8<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    GAUSS8.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>() * r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_examples() {
        let x: Vec<f64> = (0..=100).map(|j| j as f64 / 100.0).collect();
        let f: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert!((integrate_space(&x, &f).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let x2 = [0.0, 1.0, 2.0];
        assert_eq!(integrate_space(&x2, &[1.0, 1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(integrate_space(&x2, &[0.0; 3]).unwrap(), 0.0);
        assert!(integrate_space(&[0.0, 2.0, 1.0], &[0.0; 3]).is_err());
    }

    #[test]
    fn even_count_simpson_is_fourth_order() {
        for n in [10usize, 20, 40] {
            let h = 1.0 / (n - 1) as f64;
            let f: Vec<f64> = (0..n).map(|j| (j as f64 * h).exp()).collect();
            let err = (simpson_uniform(&f, h) - (1f64.exp() - 1.0)).abs();
            assert!(err < 2e-2 * h.powi(4), "{err}");
        }
    }

    #[test]
    fn cumulative_is_fourth_order() {
        let errs: Vec<f64> = [16usize, 32]
            .iter()
            .map(|&n| {
                let h = 2.0 / n as f64;
                let f: Vec<f64> = (0..=n).map(|j| (j as f64 * h).cos()).collect();
                let c = cumulative_uniform(&f, h);
                (0..=n).map(|j| (c[j] - (j as f64 * h).sin()).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] / errs[1] > 12.0, "{errs:?}");
    }

    #[test]
    fn abel_weights_exact_for_constant_psi() {
        let g = TimeGrid::new(1.0, 64).unwrap();
        assert!((integrate_singular_history(&g, 64, |_| 1.0) - 2.0).abs() < 1e-14);
        assert_eq!(integrate_singular_history(&g, 0, |_| 1.0), 0.0);
    }
}
