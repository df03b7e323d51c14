//! Quantum-optical observables on harmonic mixtures: photon number,
//! quadrature variances and their extrema over angle, second-order auto- and
//! cross-correlations, the Cauchy–Schwarz difference, and the linear entropy.
//!
//! Quadratures follow the 0.5-floor convention: `X̂_θ` is scaled so a
//! coherent state has variance 0.5 at every angle. Mixtures of coherent
//! states can only add classical spread on top of that floor.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phasespace::HarmonicMixture;

/// Vacuum (shot-noise) quadrature variance.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Mean photon number `Σ_k w_k |β_k|²`.
pub fn mean_photon(mixture: &HarmonicMixture) -> f64 {
    mixture.expectation(|beta| beta.norm_sqr())
}

fn quadrature_component(beta: C64, theta: f64) -> f64 {
    std::f64::consts::SQRT_2 * (beta * C64::from_polar(1.0, -theta)).re
}

/// Variance of `X̂_θ`: the vacuum floor plus the classical spread of the
/// mixture along direction θ. Closed form, no sampling.
pub fn quadrature_variance(mixture: &HarmonicMixture, theta: f64) -> f64 {
    let mean: f64 = mixture.expectation(|b| quadrature_component(b, theta));
    let second: f64 = mixture.expectation(|b| {
        let x = quadrature_component(b, theta);
        x * x
    });
    VACUUM_VARIANCE + (second - mean * mean).max(0.0)
}

/// Quadrature-variance profile of one mode with its analytic extrema.
#[derive(Debug, Clone)]
pub struct QuadratureStats {
    pub q: f64,
    pub theta_grid: Vec<f64>,
    pub variance: Vec<f64>,
    pub var_min: f64,
    pub theta_min: f64,
    pub var_max: f64,
    pub theta_max: f64,
}

/// Extrema of `(ΔX_θ)²` over θ from the eigendecomposition of the 2×2
/// covariance of `(√2 Re β, √2 Im β)` under the mixture weights. Angles are
/// reported in `[0, π)`; the profile is π-periodic. A grid scan (181 points,
/// stored in `theta_grid`/`variance`) is included for plotting and as an
/// independent check.
pub fn variance_extrema(mixture: &HarmonicMixture) -> QuadratureStats {
    let mean_u: f64 = mixture.expectation(|b| std::f64::consts::SQRT_2 * b.re);
    let mean_v: f64 = mixture.expectation(|b| std::f64::consts::SQRT_2 * b.im);
    let c_uu: f64 = mixture.expectation(|b| {
        let u = std::f64::consts::SQRT_2 * b.re;
        u * u
    }) - mean_u * mean_u;
    let c_vv: f64 = mixture.expectation(|b| {
        let v = std::f64::consts::SQRT_2 * b.im;
        v * v
    }) - mean_v * mean_v;
    let c_uv: f64 = mixture.expectation(|b| 2.0 * b.re * b.im) - mean_u * mean_v;

    let half_trace = 0.5 * (c_uu + c_vv);
    let radius = (0.25 * (c_uu - c_vv).powi(2) + c_uv * c_uv).sqrt();
    let lam_max = (half_trace + radius).max(0.0);
    let lam_min = (half_trace - radius).max(0.0);
    // Isotropic (coherent-like) mixtures have no preferred axis; report 0
    // instead of the noise-level atan2 direction.
    let second_moment_scale: f64 = mixture.expectation(|b| 2.0 * b.norm_sqr());
    let theta_max = if radius <= 1e-12 * (1.0 + second_moment_scale) {
        0.0
    } else {
        wrap_half_turn(0.5 * (2.0 * c_uv).atan2(c_uu - c_vv))
    };
    let theta_min = wrap_half_turn(theta_max + std::f64::consts::FRAC_PI_2);

    let n_theta = 181;
    let theta_grid: Vec<f64> = (0..n_theta)
        .map(|k| k as f64 * std::f64::consts::PI / n_theta as f64)
        .collect();
    let variance = theta_grid
        .iter()
        .map(|&theta| quadrature_variance(mixture, theta))
        .collect();

    QuadratureStats {
        q: mixture.q,
        theta_grid,
        variance,
        var_min: VACUUM_VARIANCE + lam_min,
        theta_min,
        var_max: VACUUM_VARIANCE + lam_max,
        theta_max,
    }
}

fn wrap_half_turn(theta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut t = theta % pi;
    if t < 0.0 {
        t += pi;
    }
    t
}

/// Second-order correlation `g²_{q1,q2}` of two modes built from one shared
/// sample set (joint moments are sample-diagonal). For `q1 = q2` this is the
/// autocorrelation `⟨n(n−1)⟩`-style ratio `Σw|β|⁴ / (Σw|β|²)²`.
pub fn g2_pair(m1: &HarmonicMixture, m2: &HarmonicMixture) -> Result<f64> {
    if !m1.shares_sample_set(m2) {
        return Err(Error::MismatchedSampleSets);
    }
    let n1 = mean_photon(m1);
    let n2 = mean_photon(m2);
    if n1 == 0.0 {
        return Err(Error::UndefinedCorrelation { q: m1.q });
    }
    if n2 == 0.0 {
        return Err(Error::UndefinedCorrelation { q: m2.q });
    }
    if m1.q == m2.q {
        let fourth: f64 = m1.expectation(|b| {
            let n = b.norm_sqr();
            n * n
        });
        Ok(fourth / (n1 * n1))
    } else {
        let joint: f64 = m1
            .components
            .iter()
            .zip(&m2.components)
            .map(|(a, b)| a.weight * a.beta.norm_sqr() * b.beta.norm_sqr())
            .sum();
        Ok(joint / (n1 * n2))
    }
}

/// Intermode correlation table: `g²` for all pairs and the Cauchy–Schwarz
/// difference `Δ_CSI = g²_{11}·g²_{22} − (g²_{12})²`. Entries whose g² is
/// undefined (vacuum modes) are flagged and left NaN; the matrix is still
/// returned.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub q_list: Vec<f64>,
    pub g2: Array2<f64>,
    pub delta_csi: Array2<f64>,
    pub defined: Array2<bool>,
}

pub fn csi_matrix(mixtures: &[HarmonicMixture]) -> Result<CorrelationMatrix> {
    let n = mixtures.len();
    if n == 0 {
        return Err(Error::InvalidArgument("csi_matrix needs ≥ 1 mixture".into()));
    }
    for m in &mixtures[1..] {
        if !mixtures[0].shares_sample_set(m) {
            return Err(Error::MismatchedSampleSets);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .collect();
    let entries: Vec<((usize, usize), Option<f64>)> = pairs
        .par_iter()
        .map(|&(i, j)| ((i, j), g2_pair(&mixtures[i], &mixtures[j]).ok()))
        .collect();

    let mut g2 = Array2::from_elem((n, n), f64::NAN);
    let mut defined = Array2::from_elem((n, n), false);
    for ((i, j), value) in entries {
        if let Some(v) = value {
            g2[(i, j)] = v;
            g2[(j, i)] = v;
            defined[(i, j)] = true;
            defined[(j, i)] = true;
        }
    }
    let mut delta_csi = Array2::from_elem((n, n), f64::NAN);
    for i in 0..n {
        for j in 0..n {
            if defined[(i, i)] && defined[(j, j)] && defined[(i, j)] {
                delta_csi[(i, j)] = g2[(i, i)] * g2[(j, j)] - g2[(i, j)] * g2[(i, j)];
            }
        }
    }
    Ok(CorrelationMatrix {
        q_list: mixtures.iter().map(|m| m.q).collect(),
        g2,
        delta_csi,
        defined,
    })
}

/// Linear entropy `S_lin = 1 − Tr ρ²` from the coherent-state overlap
/// `|⟨β|β'⟩|² = exp(−|β−β'|²)`. Zero iff the mixture occupies a single point;
/// bounded below 1 for any finite mixture.
pub fn linear_entropy(mixture: &HarmonicMixture) -> f64 {
    let comps = &mixture.components;
    let mut purity = 0.0;
    for (k, a) in comps.iter().enumerate() {
        purity += a.weight * a.weight;
        for b in &comps[k + 1..] {
            purity += 2.0 * a.weight * b.weight * (-(a.beta - b.beta).norm_sqr()).exp();
        }
    }
    1.0 - purity
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use approx::assert_abs_diff_eq;

    use super::*;

    fn two_point(betas: [C64; 2]) -> HarmonicMixture {
        HarmonicMixture::from_components(12.0, &[0.5, 0.5], &betas)
    }

    #[test]
    fn mean_photon_examples() {
        let vacuum = HarmonicMixture::single(12.0, C64::new(0.0, 0.0));
        assert_eq!(mean_photon(&vacuum), 0.0);
        let coherent = HarmonicMixture::single(12.0, C64::new(2.0, 0.0));
        assert_abs_diff_eq!(mean_photon(&coherent), 4.0, epsilon = 1e-15);
        let pair = two_point([C64::new(1.0, 0.0), C64::new(3.0, 0.0)]);
        assert_abs_diff_eq!(mean_photon(&pair), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn coherent_states_sit_at_the_vacuum_floor() {
        let coherent = HarmonicMixture::single(12.0, C64::new(1.3, -0.8));
        for theta in [0.0, 0.4, FRAC_PI_2, 2.9] {
            assert_abs_diff_eq!(
                quadrature_variance(&coherent, theta),
                0.5,
                epsilon = 1e-12
            );
        }
        let vacuum = HarmonicMixture::single(12.0, C64::new(0.0, 0.0));
        assert_eq!(quadrature_variance(&vacuum, 0.7), 0.5);
    }

    #[test]
    fn symmetric_two_point_mixture_variances() {
        let delta = 0.9;
        let spread = delta / std::f64::consts::SQRT_2;
        let mixture = two_point([C64::new(spread, 0.0), C64::new(-spread, 0.0)]);
        assert_abs_diff_eq!(
            quadrature_variance(&mixture, 0.0),
            0.5 + delta * delta,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(quadrature_variance(&mixture, FRAC_PI_2), 0.5, epsilon = 1e-12);

        let stats = variance_extrema(&mixture);
        assert_abs_diff_eq!(stats.var_max, 0.5 + delta * delta, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.theta_max, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.var_min, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.theta_min, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn extrema_agree_with_grid_scan() {
        let mixture = HarmonicMixture::from_components(
            14.0,
            &[0.2, 0.5, 0.3],
            &[C64::new(0.4, 1.0), C64::new(-0.3, 0.2), C64::new(1.1, -0.6)],
        );
        let stats = variance_extrema(&mixture);
        let fine: Vec<f64> = (0..20000)
            .map(|k| {
                quadrature_variance(&mixture, k as f64 * std::f64::consts::PI / 20000.0)
            })
            .collect();
        let scan_max = fine.iter().cloned().fold(f64::MIN, f64::max);
        let scan_min = fine.iter().cloned().fold(f64::MAX, f64::min);
        assert_abs_diff_eq!(stats.var_max, scan_max, epsilon = 1e-8);
        assert_abs_diff_eq!(stats.var_min, scan_min, epsilon = 1e-8);
    }

    #[test]
    fn coherent_extrema_report_zero_angle() {
        let coherent = HarmonicMixture::single(16.0, C64::new(0.7, 0.7));
        let stats = variance_extrema(&coherent);
        assert_abs_diff_eq!(stats.var_min, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.var_max, 0.5, epsilon = 1e-12);
        assert_eq!(stats.theta_max, 0.0);
    }

    #[test]
    fn variance_profile_is_pi_periodic() {
        let mixture = two_point([C64::new(0.2, 0.9), C64::new(-0.5, 0.1)]);
        for theta in [0.0, 0.3, 1.2, 2.0] {
            let a = quadrature_variance(&mixture, theta);
            let b = quadrature_variance(&mixture, theta + std::f64::consts::PI);
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_coherent_pairs_have_unit_g2() {
        let a = HarmonicMixture::single(11.0, C64::new(1.4, 0.2));
        let b = HarmonicMixture::single(12.0, C64::new(0.3, -0.9));
        assert_eq!(g2_pair(&a, &a).unwrap(), 1.0);
        assert_eq!(g2_pair(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn autocorrelation_of_two_point_mixture() {
        let mixture = two_point([C64::new(1.0, 0.0), C64::new(3f64.sqrt(), 0.0)]);
        // |β|² = 1 and 3 → (0.5·1 + 0.5·9)/(0.5·1 + 0.5·3)² = 5/4.
        assert_abs_diff_eq!(g2_pair(&mixture, &mixture).unwrap(), 1.25, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_correlation_is_tagged_undefined() {
        let vacuum = HarmonicMixture::single(25.0, C64::new(0.0, 0.0));
        assert!(matches!(
            g2_pair(&vacuum, &vacuum),
            Err(Error::UndefinedCorrelation { .. })
        ));
    }

    #[test]
    fn mismatched_sample_sets_are_rejected() {
        let a = HarmonicMixture::from_components(
            11.0,
            &[0.5, 0.5],
            &[C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
        );
        let b = HarmonicMixture::from_components(
            12.0,
            &[0.4, 0.6],
            &[C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
        );
        assert!(matches!(
            g2_pair(&a, &b),
            Err(Error::MismatchedSampleSets)
        ));
    }

    #[test]
    fn all_coherent_csi_saturates() {
        let mixtures: Vec<_> = [11.0, 12.0, 13.0]
            .iter()
            .map(|&q| HarmonicMixture::single(q, C64::new(1.0 + q / 10.0, 0.3)))
            .collect();
        let matrix = csi_matrix(&mixtures).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(matrix.defined[(i, j)]);
                assert_abs_diff_eq!(matrix.g2[(i, j)], 1.0, epsilon = 1e-14);
                assert_abs_diff_eq!(matrix.delta_csi[(i, j)], 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn csi_diagonal_is_exactly_zero_and_vacuum_entries_flagged() {
        let weights = [0.25, 0.75];
        let spread = HarmonicMixture::from_components(
            12.0,
            &weights,
            &[C64::new(0.4, 0.0), C64::new(1.9, 0.4)],
        );
        let other = HarmonicMixture::from_components(
            13.0,
            &weights,
            &[C64::new(1.0, -0.2), C64::new(0.2, 0.8)],
        );
        let vacuum =
            HarmonicMixture::from_components(25.0, &weights, &[C64::new(0.0, 0.0); 2]);
        let matrix = csi_matrix(&[spread, other, vacuum]).unwrap();
        assert_eq!(matrix.delta_csi[(0, 0)], 0.0);
        assert_eq!(matrix.delta_csi[(1, 1)], 0.0);
        assert!(!matrix.defined[(2, 2)]);
        assert!(matrix.delta_csi[(0, 2)].is_nan());
        // Classical mixtures obey the CSI.
        assert!(matrix.delta_csi[(0, 1)] >= -1e-9);
    }

    #[test]
    fn entropy_examples() {
        let pure = HarmonicMixture::single(12.0, C64::new(1.7, -0.4));
        assert_eq!(linear_entropy(&pure), 0.0);

        let far = HarmonicMixture::from_components(
            12.0,
            &[0.5, 0.5],
            &[C64::new(0.0, 0.0), C64::new(50.0, 0.0)],
        );
        assert_abs_diff_eq!(linear_entropy(&far), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn entropy_stays_in_unit_interval() {
        let mixture = HarmonicMixture::from_components(
            12.0,
            &[0.1, 0.2, 0.3, 0.4],
            &[
                C64::new(0.0, 0.0),
                C64::new(2.0, 1.0),
                C64::new(-1.0, 2.0),
                C64::new(0.5, -2.5),
            ],
        );
        let s = linear_entropy(&mixture);
        assert!((0.0..1.0).contains(&s));
    }
}
