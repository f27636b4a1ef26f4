//! Gauss rules used as independent oracles.

use std::num::NonZeroUsize;

use gauss_quad::laguerre::GaussLaguerre;
use gauss_quad::legendre::GaussLegendre;
use gauss_quad::FiniteAboveNegOneF64;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn degree(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(1)).expect("nonzero")
}

/// Nodes and weights of an `n`-point Gauss–Legendre rule mapped onto `[a, b]`.
pub fn legendre_rule(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    GaussLegendre::new(degree(n))
        .iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Tensor-product Gauss–Legendre rule on a rectangle.
#[derive(Debug, Clone)]
pub struct GaussLegendre2D {
    xs: Vec<(f64, f64)>,
    ys: Vec<(f64, f64)>,
}

impl GaussLegendre2D {
    pub fn new(n: usize, x_range: [f64; 2], y_range: [f64; 2]) -> Self {
        Self {
            xs: legendre_rule(n, x_range[0], x_range[1]),
            ys: legendre_rule(n, y_range[0], y_range[1]),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.xs
            .iter()
            .map(|&(x, wx)| wx * self.ys.iter().map(|&(y, wy)| wy * f(x, y)).sum::<f64>())
            .sum()
    }

    pub fn integrate_complex(&self, f: impl Fn(f64, f64) -> Complex64) -> Complex64 {
        self.xs
            .iter()
            .map(|&(x, wx)| {
                self.ys
                    .iter()
                    .map(|&(y, wy)| f(x, y) * wy)
                    .sum::<Complex64>()
                    * wx
            })
            .sum()
    }
}

/// Generalized Gauss–Laguerre rule for `∫₀^∞ x^α e^{−x} f(x) dx`.
#[derive(Debug, Clone)]
pub struct LaguerreRule {
    alpha: f64,
    pairs: Vec<(f64, f64)>,
}

impl LaguerreRule {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let a = FiniteAboveNegOneF64::new(alpha)
            .ok_or_else(|| Error::invalid("alpha", format!("{alpha} must be finite and > -1")))?;
        let rule = GaussLaguerre::new(degree(n), a);
        Ok(Self {
            alpha,
            pairs: rule.iter().map(|(x, w)| (*x, *w)).collect(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Ascending nodes; for degree `k` these are the roots of `L_k^α`.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.pairs.iter().map(|&(x, w)| w * f(x)).sum()
    }

    /// `∫₀^∞ f(r) dr` for integrands decaying like `r^α e^{−rate·r}`; `f` is the
    /// full integrand, the weight is divided out at each node.
    pub fn integrate_scaled(&self, rate: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.pairs
            .iter()
            .map(|&(x, w)| {
                let r = x / rate;
                let weight = x.powf(self.alpha) * (-x).exp();
                if weight == 0.0 {
                    0.0
                } else {
                    w * f(r) / weight / rate
                }
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_gaussian() {
        let q = GaussLegendre2D::new(120, [-8.0, 8.0], [-8.0, 8.0]);
        let v = q.integrate(|x, y| (-(x * x + y * y)).exp());
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn laguerre_moments() {
        let q = LaguerreRule::new(20, 2.0).unwrap();
        // ∫ x² e^{-x} x³ dx = 5!
        assert!((q.integrate(|x| x.powi(3)) - 120.0).abs() < 1e-9);
        let s = LaguerreRule::new(40, 0.0).unwrap();
        let v = s.integrate_scaled(3.0, |r| r * r * (-3.0 * r).exp());
        assert!((v - 2.0 / 27.0).abs() < 1e-13);
        assert!(LaguerreRule::new(4, -1.5).is_err());
    }
}
