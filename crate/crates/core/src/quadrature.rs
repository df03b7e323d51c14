//! Gauss–Hermite quadrature nodes and weights.
//!
//! Rules integrate `∫ exp(−x²) f(x) dx` over the whole real line and are
//! exact for polynomials up to degree `2n − 1`, which is what makes the
//! phase-space ensembles spectrally accurate: the limiting distributions of
//! the squeezed and thermal drivers are exactly Gaussian.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A Gauss–Hermite rule: paired nodes and weights, nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Build an `n`-point rule by the Golub–Welsch algorithm: the symmetrized
    /// Jacobi matrix of the Hermite recurrence is tridiagonal with zero
    /// diagonal and off-diagonal `sqrt(k/2)`; its eigenvalues are the nodes
    /// and `sqrt(π)` times the squared first eigenvector components the
    /// weights.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "Gauss-Hermite rule needs at least one node".into(),
            ));
        }
        if n == 1 {
            return Ok(GaussHermite {
                nodes: vec![0.0],
                weights: vec![std::f64::consts::PI.sqrt()],
            });
        }
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let e = (k as f64 / 2.0).sqrt();
            jacobi[(k - 1, k)] = e;
            jacobi[(k, k - 1)] = e;
        }
        let eigen = jacobi.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = eigen
            .eigenvalues
            .iter()
            .zip(eigen.eigenvectors.row(0).iter())
            .map(|(&node, &v0)| (node, std::f64::consts::PI.sqrt() * v0 * v0))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(GaussHermite { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `exp(−x²)·f(x)` over ℝ.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn single_node_rule() {
        let rule = GaussHermite::new(1).unwrap();
        assert_eq!(rule.nodes, vec![0.0]);
        assert_abs_diff_eq!(rule.weights[0], PI.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn zero_nodes_is_an_error() {
        assert!(GaussHermite::new(0).is_err());
    }

    #[test]
    fn gaussian_moments_are_exact() {
        for n in [2, 7, 21, 41] {
            let rule = GaussHermite::new(n).unwrap();
            assert_abs_diff_eq!(rule.integrate(|_| 1.0), PI.sqrt(), epsilon = 1e-12);
            assert_abs_diff_eq!(
                rule.integrate(|x| x * x),
                PI.sqrt() / 2.0,
                epsilon = 1e-12
            );
            if n >= 3 {
                assert_abs_diff_eq!(
                    rule.integrate(|x| x.powi(4)),
                    0.75 * PI.sqrt(),
                    epsilon = 1e-11
                );
            }
        }
    }

    #[test]
    fn oscillatory_integrand_converges() {
        // ∫ exp(−x²) cos x dx = sqrt(π)·exp(−1/4)
        let rule = GaussHermite::new(20).unwrap();
        assert_abs_diff_eq!(
            rule.integrate(f64::cos),
            PI.sqrt() / (0.25f64).exp(),
            epsilon = 1e-13
        );
    }
}
