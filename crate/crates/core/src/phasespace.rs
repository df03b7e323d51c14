//! Post-limit quantum state of a harmonic mode: a weighted mixture of
//! coherent states, one component per phase-space sample.
//!
//! In the classical and quasi-thermodynamic limits every observable average
//! of harmonic `q` reduces to a weighted ensemble over coherent amplitudes
//! `β_k = √q·ϱ·d_k(ω_q)`, with the weights inherited from the Husimi-limit
//! sample set. Off-diagonal coherences are exponentially suppressed in this
//! regime, so the diagonal mixture is the complete description.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::DriverConfig;
use crate::dipole::DipoleRecord;
use crate::error::{Error, Result};
use crate::field::PhaseSpaceSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub beta: C64,
}

/// Harmonic mode `q` as a statistical mixture of coherent states. Components
/// are parallel to the phase-space sample set (same length and order), which
/// is what makes joint moments across modes sample-diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMixture {
    pub q: f64,
    pub components: Vec<MixtureComponent>,
    /// Two-color phase this state was built at.
    pub phi: f64,
    /// Coupling ϱ used for the amplitude map.
    pub rho_coupling: f64,
    /// Fingerprint of the generating sample set; joint-moment operations
    /// require both mixtures to agree on it.
    pub sample_fingerprint: u64,
}

pub(crate) fn fingerprint_samples(samples: &[PhaseSpaceSample]) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    for s in samples {
        s.gamma_x.to_bits().hash(&mut hasher);
        s.gamma_y.to_bits().hash(&mut hasher);
        s.weight.to_bits().hash(&mut hasher);
    }
    hasher.finish()
}

/// Assemble the mixture of harmonic `q` from aligned dipole records and
/// samples: `components[k] = (w_k, √q·ϱ·d_k(ω_q))`.
///
/// `q` must lie on the records' frequency grid (no interpolation), and the
/// config must carry a resolved `rho_coupling`.
pub fn build_mixture(
    q: f64,
    records: &[DipoleRecord],
    samples: &[PhaseSpaceSample],
    config: &DriverConfig,
) -> Result<HarmonicMixture> {
    if records.len() != samples.len() {
        return Err(Error::InvalidArgument(format!(
            "{} records vs {} samples; the sets must be aligned",
            records.len(),
            samples.len()
        )));
    }
    let rho = config.rho_coupling.ok_or_else(|| {
        Error::InvalidArgument(
            "rho_coupling unresolved; set it or run pipeline::calibrate_rho first".into(),
        )
    })?;
    let scale = q.sqrt() * rho;
    let components = records
        .iter()
        .zip(samples)
        .map(|(record, sample)| {
            Ok(MixtureComponent {
                weight: sample.weight,
                beta: record.spectrum_at(q)? * scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HarmonicMixture {
        q,
        components,
        phi: config.phi,
        rho_coupling: rho,
        sample_fingerprint: fingerprint_samples(samples),
    })
}

impl HarmonicMixture {
    /// Build directly from weights and amplitudes (tests, synthetic states).
    pub fn from_components(q: f64, weights: &[f64], betas: &[C64]) -> Self {
        assert_eq!(weights.len(), betas.len());
        let components = weights
            .iter()
            .zip(betas)
            .map(|(&weight, &beta)| MixtureComponent { weight, beta })
            .collect();
        let mut hasher_input: Vec<PhaseSpaceSample> = Vec::new();
        for (k, &w) in weights.iter().enumerate() {
            hasher_input.push(PhaseSpaceSample {
                gamma_x: k as f64,
                gamma_y: 0.0,
                weight: w,
            });
        }
        HarmonicMixture {
            q,
            components,
            phi: 0.0,
            rho_coupling: 1.0,
            sample_fingerprint: fingerprint_samples(&hasher_input),
        }
    }

    pub fn single(q: f64, beta: C64) -> Self {
        Self::from_components(q, &[1.0], &[beta])
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Ensemble average `Σ_k w_k f(β_k)`; linear in `f`.
    pub fn expectation<T>(&self, f: impl Fn(C64) -> T) -> T
    where
        T: std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        self.components
            .iter()
            .map(|c| f(c.beta) * c.weight)
            .sum()
    }

    /// Like [`Self::expectation`] but the evaluator may fail; failures are
    /// tagged with the component index.
    pub fn try_expectation<T>(&self, f: impl Fn(C64) -> Result<T>) -> Result<T>
    where
        T: std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        self.components
            .iter()
            .enumerate()
            .map(|(k, c)| {
                f(c.beta)
                    .map(|v| v * c.weight)
                    .map_err(|e| Error::EvaluatorFailure {
                        sample_index: k,
                        source: Box::new(e),
                    })
            })
            .sum()
    }

    /// Ensemble-mean coherent amplitude.
    pub fn mean_beta(&self) -> C64 {
        self.expectation(|beta| beta)
    }

    pub fn shares_sample_set(&self, other: &HarmonicMixture) -> bool {
        self.len() == other.len() && self.sample_fingerprint == other.sample_fingerprint
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::config::SqueezingSpec;
    use crate::dipole::ensemble_dipoles;
    use crate::field::sample_phase_space;

    fn small_config() -> DriverConfig {
        let mut config = DriverConfig::default();
        config.time_grid.n_steps = 512;
        config.n_cycles = 3;
        config.time_grid.t_end = 3.0 * config.cycle_period();
        config.rho_coupling = Some(1.0);
        config
    }

    #[test]
    fn coherent_driver_gives_single_component() {
        let mut config = small_config();
        config.squeezing = SqueezingSpec::coherent();
        let samples = sample_phase_space(&config, 21).unwrap();
        let records = ensemble_dipoles(&config, &samples, None).unwrap();
        let mixture = build_mixture(12.0, &records, &samples, &config).unwrap();
        assert_eq!(mixture.len(), 1);
        assert_eq!(mixture.components[0].weight, 1.0);
    }

    #[test]
    fn zero_spectra_give_vacuum() {
        let config = small_config();
        let grid = config.time_grid;
        let records: Vec<_> = (0..3)
            .map(|k| {
                DipoleRecord::from_time_series(
                    k,
                    vec![0.0; grid.n_steps],
                    grid,
                    config.omega,
                    crate::dipole::SpectralWindow::Hann,
                )
                .unwrap()
            })
            .collect();
        let samples = vec![
            PhaseSpaceSample {
                gamma_x: 0.0,
                gamma_y: -1e-3,
                weight: 0.25,
            },
            PhaseSpaceSample::delta(),
            PhaseSpaceSample {
                gamma_x: 0.0,
                gamma_y: 1e-3,
                weight: 0.25,
            },
        ];
        let mixture = build_mixture(12.0, &records, &samples, &config).unwrap();
        assert!(mixture.components.iter().all(|c| c.beta.norm() == 0.0));
    }

    #[test]
    fn doubling_rho_doubles_every_beta() {
        let config = small_config();
        let samples = sample_phase_space(&config, 5).unwrap();
        let records = ensemble_dipoles(&config, &samples, None).unwrap();
        let base = build_mixture(12.0, &records, &samples, &config).unwrap();
        let doubled =
            build_mixture(12.0, &records, &samples, &config.with_rho(2.0)).unwrap();
        for (a, b) in base.components.iter().zip(&doubled.components) {
            assert!((b.beta - 2.0 * a.beta).norm() <= 1e-15 * b.beta.norm().max(1e-300));
        }
    }

    #[test]
    fn expectation_normalization_and_moments() {
        let mixture = HarmonicMixture::from_components(
            12.0,
            &[0.5, 0.5],
            &[C64::new(1.0, 0.0), C64::new(3.0, 0.0)],
        );
        assert_abs_diff_eq!(mixture.expectation(|_| 1.0), 1.0, epsilon = 1e-15);
        let single = HarmonicMixture::single(12.0, C64::new(0.3, -1.2));
        assert_abs_diff_eq!(
            single.expectation(|b| b.norm_sqr()),
            single.components[0].beta.norm_sqr(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn expectation_matches_hand_computed_weighted_sum() {
        let mixture = HarmonicMixture::from_components(
            8.0,
            &[0.3, 0.7],
            &[C64::new(0.4, 1.1), C64::new(-0.9, 0.2)],
        );
        let by_hand = 0.3 * 0.4 + 0.7 * (-0.9);
        assert_abs_diff_eq!(
            mixture.expectation(|b| b.re),
            by_hand,
            epsilon = 1e-12
        );
    }

    #[test]
    fn evaluator_failures_carry_the_component_index() {
        let mixture = HarmonicMixture::from_components(
            8.0,
            &[0.5, 0.5],
            &[C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
        );
        let err = mixture
            .try_expectation::<f64>(|b| {
                if b.re > 1.5 {
                    Err(Error::Domain("too big".into()))
                } else {
                    Ok(b.re)
                }
            })
            .unwrap_err();
        match err {
            Error::EvaluatorFailure { sample_index, .. } => assert_eq!(sample_index, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn off_grid_q_is_rejected() {
        let config = small_config();
        let samples = sample_phase_space(&config, 3).unwrap();
        let records = ensemble_dipoles(&config, &samples, None).unwrap();
        assert!(matches!(
            build_mixture(12.15, &records, &samples, &config),
            Err(Error::OffGridHarmonic { .. })
        ));
    }
}
