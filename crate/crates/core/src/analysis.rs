//! Time-frequency and trajectory-level diagnostics: Gabor spectrograms of
//! the (ensemble-averaged) dipole, the classical inversion recovering the
//! two-color action correction σ from even/odd harmonic intensities, and the
//! homodyne-style probe that replaces it for squeezed drivers.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DriverConfig, TimeGrid};
use crate::dipole::DipoleRecord;
use crate::error::{Error, Result};
use crate::field::PhaseSpaceSample;
use crate::phasespace::{fingerprint_samples, HarmonicMixture};

/// Gaussian window width from the time-frequency analysis, in a.u. of time
/// (145 attoseconds).
pub const DEFAULT_GABOR_DELTA: f64 = 6.0;

/// Attoseconds per atomic unit of time.
pub const ATTOSECONDS_PER_AU: f64 = 24.188843265857;

/// Magnitude of the windowed Fourier transform `|G(ω, τ)|` on a τ × ω grid.
#[derive(Debug, Clone)]
pub struct GaborMap {
    pub tau_axis: Vec<f64>,
    pub omega_axis: Vec<f64>,
    /// `magnitude[(i, j)]` at `(tau_axis[i], omega_axis[j])`.
    pub magnitude: ndarray::Array2<f64>,
    pub delta: f64,
}

impl GaborMap {
    /// Frobenius norm of the map.
    pub fn norm(&self) -> f64 {
        self.magnitude.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// L² distance between unit-normalized maps (0 = identical shapes).
    pub fn normalized_distance(&self, other: &GaborMap) -> f64 {
        assert_eq!(self.magnitude.dim(), other.magnitude.dim());
        let (na, nb) = (self.norm(), other.norm());
        self.magnitude
            .iter()
            .zip(other.magnitude.iter())
            .map(|(&a, &b)| (a / na - b / nb).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Gabor transform by direct quadrature of
/// `G(ω, τ) = ∫ dt d(t)·w(t − τ)·e^{−iωt}` with the normalized Gaussian
/// window `w(t) = exp(−t²/δ²)/(δ√π)`. Direct evaluation keeps the frequency
/// axis free to hit exact harmonic orders regardless of the grid length.
pub fn gabor_transform(
    d_t: &[f64],
    grid: &TimeGrid,
    delta: f64,
    tau_axis: &[f64],
    omega_axis: &[f64],
) -> Result<GaborMap> {
    if d_t.len() != grid.n_steps {
        return Err(Error::InvalidArgument(format!(
            "series has {} samples, grid has {}",
            d_t.len(),
            grid.n_steps
        )));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument("window width must be positive".into()));
    }
    let dt = grid.dt();
    if delta < 2.0 * dt {
        return Err(Error::Resolution(format!(
            "window δ = {delta} is below two time steps ({})",
            2.0 * dt
        )));
    }
    if tau_axis.iter().any(|&tau| !grid.contains(tau)) {
        return Err(Error::Domain(
            "every τ must lie within the time grid".into(),
        ));
    }
    let window_norm = 1.0 / (delta * std::f64::consts::PI.sqrt());
    // The window is negligible beyond 8δ; clip the quadrature there.
    let half_width = (8.0 * delta / dt).ceil() as usize;

    let rows: Vec<Vec<f64>> = tau_axis
        .par_iter()
        .map(|&tau| {
            let center = ((tau - grid.t_start) / dt).round() as isize;
            let lo = (center - half_width as isize).max(0) as usize;
            let hi = ((center + half_width as isize) as usize).min(grid.n_steps - 1);
            let windowed: Vec<(f64, f64)> = (lo..=hi)
                .map(|j| {
                    let t = grid.time(j);
                    let arg = (t - tau) / delta;
                    (t, d_t[j] * window_norm * (-arg * arg).exp())
                })
                .collect();
            omega_axis
                .iter()
                .map(|&w| {
                    let mut acc = C64::new(0.0, 0.0);
                    for &(t, s) in &windowed {
                        acc += C64::from_polar(s, -w * t);
                    }
                    (acc * dt).norm()
                })
                .collect()
        })
        .collect();
    let mut magnitude = ndarray::Array2::zeros((tau_axis.len(), omega_axis.len()));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            magnitude[(i, j)] = v;
        }
    }
    Ok(GaborMap {
        tau_axis: tau_axis.to_vec(),
        omega_axis: omega_axis.to_vec(),
        magnitude,
        delta,
    })
}

/// Gabor map of the weight-averaged ensemble dipole `Σ_k w_k d_k(t)`.
pub fn ensemble_gabor(
    samples: &[PhaseSpaceSample],
    records: &[DipoleRecord],
    grid: &TimeGrid,
    delta: f64,
    tau_axis: &[f64],
    omega_axis: &[f64],
) -> Result<GaborMap> {
    if samples.len() != records.len() || samples.is_empty() {
        return Err(Error::InvalidArgument(
            "ensemble_gabor needs aligned, nonempty samples and records".into(),
        ));
    }
    let mut mean = vec![0.0; grid.n_steps];
    for (sample, record) in samples.iter().zip(records) {
        for (acc, &d) in mean.iter_mut().zip(&record.d_t) {
            *acc += sample.weight * d;
        }
    }
    gabor_transform(&mean, grid, delta, tau_axis, omega_axis)
}

/// Default spectrogram axes: `n_tau` window centers across the pulse and a
/// frequency axis in steps of ω/4 up to just past the cutoff.
pub fn gabor_default_axes(config: &DriverConfig, n_tau: usize) -> (Vec<f64>, Vec<f64>) {
    let grid = &config.time_grid;
    let tau: Vec<f64> = (0..n_tau)
        .map(|k| grid.t_start + grid.total() * (k as f64 + 0.5) / n_tau as f64)
        .collect();
    let q_max = crate::dipole::cutoff_estimate(config) as f64 + 6.0;
    let n_omega = (4.0 * q_max) as usize;
    let omega: Vec<f64> = (1..=n_omega)
        .map(|k| 0.25 * k as f64 * config.omega)
        .collect();
    (tau, omega)
}

/// Origin of a σ estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    IntensityInversion,
    HomodyneProbe,
}

/// Complex correction `σ = σ_x + iσ_y` to the semiclassical action induced
/// by the 2ω field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    /// Real part, principal branch in \[0, π/2\].
    pub sigma_x: f64,
    /// Imaginary part, ≥ 0.
    pub sigma_y: f64,
    pub source: SigmaSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Harmonic intensity under the two-color saddle-point model:
/// `I_q = I_0·|cos σ|²` for odd q and `I_0·|sin σ|²` for even q, with
/// `|cos σ|² = cos²σ_x cosh²σ_y + sin²σ_x sinh²σ_y` (and the sine analogue).
pub fn intensity_model(sigma: C64, i_0: f64, parity: Parity) -> f64 {
    let (sx, sy) = (sigma.re, sigma.im);
    let factor = match parity {
        Parity::Odd => sx.cos().powi(2) * sy.cosh().powi(2) + sx.sin().powi(2) * sy.sinh().powi(2),
        Parity::Even => sx.sin().powi(2) * sy.cosh().powi(2) + sx.cos().powi(2) * sy.sinh().powi(2),
    };
    i_0 * factor
}

/// Invert consecutive even/odd intensities for σ:
/// `σ_x = ½·cos⁻¹((I_odd − I_even)/I_0)`, `σ_y = ½·cosh⁻¹((I_odd + I_even)/I_0)`.
///
/// Outside its preconditions (`|I_odd − I_even| ≤ I_0`,
/// `I_odd + I_even ≥ I_0`) the classical model does not apply — squeezed
/// drivers land here — and an inversion-domain error is returned.
pub fn sigma_inversion(i_odd: f64, i_even: f64, i_0: f64) -> Result<SigmaEstimate> {
    if !(i_0 > 0.0 && i_odd >= 0.0 && i_even >= 0.0) {
        return Err(Error::InversionDomain(
            "intensities must be nonnegative with I_0 > 0".into(),
        ));
    }
    let slack = 1e-9;
    let cos_arg = (i_odd - i_even) / i_0;
    let cosh_arg = (i_odd + i_even) / i_0;
    if cos_arg.abs() > 1.0 + slack {
        return Err(Error::InversionDomain(format!(
            "|I_odd − I_even| = {:.3e} exceeds I_0 = {i_0:.3e}",
            (i_odd - i_even).abs()
        )));
    }
    if cosh_arg < 1.0 - slack {
        return Err(Error::InversionDomain(format!(
            "I_odd + I_even = {:.3e} is below I_0 = {i_0:.3e}",
            i_odd + i_even
        )));
    }
    Ok(SigmaEstimate {
        sigma_x: 0.5 * cos_arg.clamp(-1.0, 1.0).acos(),
        sigma_y: 0.5 * cosh_arg.max(1.0).acosh(),
        source: SigmaSource::IntensityInversion,
    })
}

/// Homodyne-style probe of an even harmonic: the mean quadrature signal
/// `⟨X_θ⟩ ∝ Σ_k w_k [Re d_k(ω_q)·cos θ + Im d_k(ω_q)·sin θ]` for each θ,
/// separating the ensemble-averaged real and imaginary dipole components
/// (and hence σ up to the overall dipole phase, which stays unknown).
pub fn homodyne_sigma_probe(
    mixture: &HarmonicMixture,
    records: &[DipoleRecord],
    samples: &[PhaseSpaceSample],
    theta_list: &[f64],
) -> Result<Vec<f64>> {
    let q = mixture.q;
    if q.fract() != 0.0 || (q as i64) % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "homodyne probe targets even harmonics, got q = {q}"
        )));
    }
    if records.len() != samples.len()
        || mixture.len() != samples.len()
        || mixture.sample_fingerprint != fingerprint_samples(samples)
    {
        return Err(Error::MismatchedSampleSets);
    }
    let mut mean_d = C64::new(0.0, 0.0);
    for (record, sample) in records.iter().zip(samples) {
        mean_d += sample.weight * record.spectrum_at(q)?;
    }
    Ok(theta_list
        .iter()
        .map(|&theta| mean_d.re * theta.cos() + mean_d.im * theta.sin())
        .collect())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::config::SqueezingSpec;
    use crate::dipole::ensemble_dipoles;
    use crate::field::sample_phase_space;
    use crate::phasespace::build_mixture;

    fn grid(n: usize, span: f64) -> TimeGrid {
        TimeGrid {
            t_start: 0.0,
            t_end: span,
            n_steps: n,
        }
    }

    #[test]
    fn window_width_matches_the_attosecond_figure() {
        assert!((DEFAULT_GABOR_DELTA * ATTOSECONDS_PER_AU - 145.0).abs() < 0.2);
    }

    #[test]
    fn pure_tone_ridge_sits_at_the_tone_frequency() {
        let g = grid(4096, 800.0);
        let w0 = 0.6;
        let d: Vec<f64> = (0..g.n_steps).map(|j| (w0 * g.time(j)).cos()).collect();
        let tau_axis: Vec<f64> = (1..8).map(|k| 100.0 * k as f64).collect();
        let omega_axis: Vec<f64> = (1..=100).map(|k| 0.01 * k as f64).collect();
        let map = gabor_transform(&d, &g, 20.0, &tau_axis, &omega_axis).unwrap();
        for (i, _) in tau_axis.iter().enumerate() {
            let mut best = (0usize, 0.0);
            for (j, &w) in omega_axis.iter().enumerate() {
                if map.magnitude[(i, j)] > best.1 {
                    best = (j, map.magnitude[(i, j)]);
                }
                let _ = w;
            }
            assert_abs_diff_eq!(omega_axis[best.0], w0, epsilon = 0.011);
        }
    }

    #[test]
    fn zero_signal_zero_map() {
        let g = grid(512, 500.0);
        let map = gabor_transform(
            &vec![0.0; 512],
            &g,
            6.0,
            &[250.0],
            &[0.1, 0.2, 0.3],
        )
        .unwrap();
        assert!(map.magnitude.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn window_normalization_on_the_stored_grid() {
        let g = grid(8192, 551.0);
        let dt = g.dt();
        let delta = DEFAULT_GABOR_DELTA;
        let tau = 275.0;
        let total: f64 = (0..g.n_steps)
            .map(|j| {
                let arg = (g.time(j) - tau) / delta;
                (-arg * arg).exp() / (delta * PI.sqrt()) * dt
            })
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn undersized_window_is_a_resolution_error() {
        let g = grid(64, 500.0);
        let result = gabor_transform(&vec![0.0; 64], &g, 1.0, &[250.0], &[0.1]);
        assert!(matches!(result, Err(Error::Resolution(_))));
    }

    #[test]
    fn gabor_shift_covariance() {
        let g = grid(4096, 1000.0);
        let pulse = |t: f64| (-((t - 300.0) / 40.0).powi(2)).exp() * (0.5 * t).cos();
        let shifted = |t: f64| pulse(t - 150.0);
        let d0: Vec<f64> = (0..g.n_steps).map(|j| pulse(g.time(j))).collect();
        let d1: Vec<f64> = (0..g.n_steps).map(|j| shifted(g.time(j))).collect();
        let tau0: Vec<f64> = (0..40).map(|k| 150.0 + 10.0 * k as f64).collect();
        let tau1: Vec<f64> = tau0.iter().map(|t| t + 150.0).collect();
        let omega: Vec<f64> = (30..70).map(|k| 0.01 * k as f64).collect();
        let a = gabor_transform(&d0, &g, 15.0, &tau0, &omega).unwrap();
        let b = gabor_transform(&d1, &g, 15.0, &tau1, &omega).unwrap();
        let scale = a.norm();
        for (x, y) in a.magnitude.iter().zip(b.magnitude.iter()) {
            assert_abs_diff_eq!(x / scale, y / scale, epsilon = 1e-6);
        }
    }

    #[test]
    fn coherent_ensemble_gabor_equals_single_sample() {
        let mut config = DriverConfig::default();
        config.squeezing = SqueezingSpec::coherent();
        config.time_grid.n_steps = 1024;
        let samples = sample_phase_space(&config, 9).unwrap();
        let records = ensemble_dipoles(&config, &samples, None).unwrap();
        let (tau, omega) = gabor_default_axes(&config, 24);
        let ensemble = ensemble_gabor(
            &samples,
            &records,
            &config.time_grid,
            DEFAULT_GABOR_DELTA,
            &tau,
            &omega,
        )
        .unwrap();
        let single = gabor_transform(
            &records[0].d_t,
            &config.time_grid,
            DEFAULT_GABOR_DELTA,
            &tau,
            &omega,
        )
        .unwrap();
        for (a, b) in ensemble.magnitude.iter().zip(single.magnitude.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn inversion_anchors_are_exact() {
        let unperturbed = sigma_inversion(1.0, 0.0, 1.0).unwrap();
        assert_eq!(unperturbed.sigma_x, 0.0);
        assert_eq!(unperturbed.sigma_y, 0.0);

        let balanced = sigma_inversion(0.5, 0.5, 1.0).unwrap();
        assert_eq!(balanced.sigma_x, FRAC_PI_4);
        assert_eq!(balanced.sigma_y, 0.0);
    }

    #[test]
    fn forward_model_then_inversion_is_the_identity() {
        let sigma = C64::new(0.1, 0.05);
        let i_0 = 2.3;
        let i_odd = intensity_model(sigma, i_0, Parity::Odd);
        let i_even = intensity_model(sigma, i_0, Parity::Even);
        let estimate = sigma_inversion(i_odd, i_even, i_0).unwrap();
        assert_abs_diff_eq!(estimate.sigma_x, sigma.re, epsilon = 1e-10);
        assert_abs_diff_eq!(estimate.sigma_y, sigma.im, epsilon = 1e-10);
    }

    #[test]
    fn intensity_model_limits() {
        assert_eq!(intensity_model(C64::new(0.0, 0.0), 1.0, Parity::Odd), 1.0);
        assert_eq!(intensity_model(C64::new(0.0, 0.0), 1.0, Parity::Even), 0.0);
        assert_abs_diff_eq!(
            intensity_model(C64::new(FRAC_PI_2, 0.0), 1.0, Parity::Odd),
            0.0,
            epsilon = 1e-30
        );
        assert_abs_diff_eq!(
            intensity_model(C64::new(FRAC_PI_2, 0.0), 1.0, Parity::Even),
            1.0,
            epsilon = 1e-12
        );
        // Purely imaginary σ: I_odd + I_even = I_0·cosh(2σ_y).
        let y = 0.8;
        let total = intensity_model(C64::new(0.0, y), 1.0, Parity::Odd)
            + intensity_model(C64::new(0.0, y), 1.0, Parity::Even);
        assert_abs_diff_eq!(total, (2.0 * y).cosh(), epsilon = 1e-12);
    }

    #[test]
    fn out_of_domain_inversion_is_flagged() {
        assert!(matches!(
            sigma_inversion(2.0, 0.5, 1.0),
            Err(Error::InversionDomain(_))
        ));
        assert!(matches!(
            sigma_inversion(0.3, 0.2, 1.0),
            Err(Error::InversionDomain(_))
        ));
    }

    #[test]
    fn probe_projects_real_and_imaginary_parts() {
        let mut config = DriverConfig::default();
        config.time_grid.n_steps = 1024;
        config.rho_coupling = Some(1.0);
        config.n_samples = Some(5);
        let samples = sample_phase_space(&config, 5).unwrap();
        let records = ensemble_dipoles(&config, &samples, None).unwrap();
        let mixture = build_mixture(12.0, &records, &samples, &config).unwrap();

        let values =
            homodyne_sigma_probe(&mixture, &records, &samples, &[0.0, FRAC_PI_2, FRAC_PI_4])
                .unwrap();
        let mut mean_d = C64::new(0.0, 0.0);
        for (record, sample) in records.iter().zip(&samples) {
            mean_d += sample.weight * record.spectrum_at(12.0).unwrap();
        }
        assert_abs_diff_eq!(values[0], mean_d.re, epsilon = 1e-15);
        assert_abs_diff_eq!(values[1], mean_d.im, epsilon = 1e-15);
        // The θ = π/4 value is the sinusoid built from the θ = 0, π/2 pair.
        let combined = values[0] * FRAC_PI_4.cos() + values[1] * FRAC_PI_4.sin();
        assert_abs_diff_eq!(values[2], combined, epsilon = 1e-10 * combined.abs().max(1e-30));
    }

    #[test]
    fn probe_rejects_odd_harmonics() {
        let mixture = HarmonicMixture::single(13.0, C64::new(1.0, 0.0));
        assert!(homodyne_sigma_probe(&mixture, &[], &[], &[0.0]).is_err());
    }
}
