//! Classical field realizations of the two-color driver and the phase-space
//! ensemble they are drawn from.
//!
//! The strong ω component is a pure classical coherent field; only the 2ω
//! component carries fluctuation samples. Fluctuations live in the rotated
//! `γ` frame where the squeezing type stays fixed as φ varies (the squeezing
//! phase is slaved to the two-color delay, `θ̄ = 2φ`). In the classical and
//! quasi-thermodynamic limits the Husimi distribution of the 2ω driver
//! collapses to a delta along the squeezed quadrature times a Gaussian of
//! variance `ς = 4·I_squ` along the orthogonal one.

use crate::config::{DriverConfig, Envelope, SqueezeAxis, SqueezeKind};
use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;

/// Squeezing intensities below this are numerically a coherent driver; the
/// sample set degrades to the single delta sample.
const DELTA_I_SQU: f64 = 1e-30;

/// One sampled fluctuation of the 2ω field with its quadrature weight.
///
/// `gamma_x` points along the mean-field (amplitude) direction of the `γ`
/// frame and `gamma_y` along the phase direction, both in field units.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhaseSpaceSample {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub weight: f64,
}

impl PhaseSpaceSample {
    pub fn delta() -> Self {
        PhaseSpaceSample {
            gamma_x: 0.0,
            gamma_y: 0.0,
            weight: 1.0,
        }
    }
}

/// Map a `γ`-frame fluctuation to the 2ω quadrature pair
/// `(E_{2ω,x}, E_{2ω,y})` in the original frame:
///
/// ```text
/// E_x = (γ_x + ε·E_ω)·cos φ − γ_y·sin φ
/// E_y = (γ_x + ε·E_ω)·sin φ + γ_y·cos φ
/// ```
///
/// At `γ = 0` this is the mean 2ω field `ε·E_ω·(cos φ, sin φ)`.
pub fn frame_transform(sample: &PhaseSpaceSample, config: &DriverConfig) -> (f64, f64) {
    let mean = config.two_color_amplitude();
    let (sin_phi, cos_phi) = config.phi.sin_cos();
    let radial = sample.gamma_x + mean;
    (
        radial * cos_phi - sample.gamma_y * sin_phi,
        radial * sin_phi + sample.gamma_y * cos_phi,
    )
}

/// Envelope at time `t`, defined on the whole real line: the flat envelope
/// is the continuous-wave steady state (identically one, also before the
/// grid), the sin² pulse vanishes outside its support.
pub(crate) fn envelope_value(config: &DriverConfig, t: f64) -> f64 {
    match config.envelope {
        Envelope::Flat => 1.0,
        Envelope::Sin2 => {
            if !config.time_grid.contains(t) {
                return 0.0;
            }
            let span = config.time_grid.total();
            let x = std::f64::consts::PI * (t - config.time_grid.t_start) / span;
            let s = x.sin();
            s * s
        }
    }
}

/// Total driving field at time `t` for one field realization:
/// `E(t) = env(t)·[E_ω cos(ωt) + E_{2ω,x} cos(2ωt) + E_{2ω,y} sin(2ωt)]`.
///
/// Errors if `t` lies outside the configured time grid.
pub fn realize_field(sample: &PhaseSpaceSample, config: &DriverConfig, t: f64) -> Result<f64> {
    if !config.time_grid.contains(t) {
        return Err(Error::Domain(format!(
            "t = {t} outside the time grid [{}, {}]",
            config.time_grid.t_start, config.time_grid.t_end
        )));
    }
    let (e2x, e2y) = frame_transform(sample, config);
    Ok(field_at(config, e2x, e2y, t))
}

#[inline]
fn field_at(config: &DriverConfig, e2x: f64, e2y: f64, t: f64) -> f64 {
    let carrier = config.e_omega * (config.omega * t).cos()
        + e2x * (2.0 * config.omega * t).cos()
        + e2y * (2.0 * config.omega * t).sin();
    envelope_value(config, t) * carrier
}

/// Field realization evaluated on the whole stored grid. Used by the dipole
/// stage, which needs the series without per-point domain checks.
pub(crate) fn field_series(sample: &PhaseSpaceSample, config: &DriverConfig) -> Vec<f64> {
    field_series_extended(sample, config, 0)
}

/// Field realization on the grid extended `n_pre` steps before `t_start`.
/// The extension carries the envelope's off-grid value, so a flat (CW)
/// driver supplies a full excursion history to every emission time while a
/// sin² pulse sees dark time.
pub(crate) fn field_series_extended(
    sample: &PhaseSpaceSample,
    config: &DriverConfig,
    n_pre: usize,
) -> Vec<f64> {
    let (e2x, e2y) = frame_transform(sample, config);
    let dt = config.time_grid.dt();
    (0..config.time_grid.n_steps + n_pre)
        .map(|j| {
            let t = config.time_grid.t_start + (j as f64 - n_pre as f64) * dt;
            field_at(config, e2x, e2y, t)
        })
        .collect()
}

/// Build the phase-space sample set for the configured driver statistics.
///
/// * coherent — the single delta sample (`n_samples` coerced to 1);
/// * squeezed — Gauss–Hermite nodes of the 1-D Gaussian of variance
///   `ς = 4·I_squ` along the fluctuation-carrying axis, zero on the other;
/// * thermal — a tensor Gauss–Hermite grid with variance ς on both axes,
///   `n_samples` nodes per axis.
///
/// Weights always sum to one.
pub fn sample_phase_space(
    config: &DriverConfig,
    n_samples: usize,
) -> Result<Vec<PhaseSpaceSample>> {
    if n_samples < 1 {
        return Err(Error::InvalidArgument(
            "sample_phase_space needs n_samples ≥ 1".into(),
        ));
    }
    let spec = &config.squeezing;
    if spec.kind == SqueezeKind::Coherent || spec.i_squ < DELTA_I_SQU {
        return Ok(vec![PhaseSpaceSample::delta()]);
    }
    let sigma2 = spec.variance();
    // x ~ N(0, ς) via the substitution x = sqrt(2ς)·u against exp(−u²).
    let scale = (2.0 * sigma2).sqrt();
    let rule = GaussHermite::new(n_samples)?;
    let norm = std::f64::consts::PI.sqrt();
    match spec.kind {
        SqueezeKind::Coherent => unreachable!("handled above"),
        SqueezeKind::Squeezed => {
            // The squeezed quadrature is a delta in the limit; fluctuations
            // survive along the orthogonal axis only.
            let samples = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&u, &w)| {
                    let g = scale * u;
                    let (gamma_x, gamma_y) = match spec.axis {
                        SqueezeAxis::Amplitude => (0.0, g),
                        SqueezeAxis::Phase => (g, 0.0),
                    };
                    PhaseSpaceSample {
                        gamma_x,
                        gamma_y,
                        weight: w / norm,
                    }
                })
                .collect();
            Ok(samples)
        }
        SqueezeKind::Thermal => {
            let mut samples = Vec::with_capacity(n_samples * n_samples);
            for (&ux, &wx) in rule.nodes.iter().zip(&rule.weights) {
                for (&uy, &wy) in rule.nodes.iter().zip(&rule.weights) {
                    samples.push(PhaseSpaceSample {
                        gamma_x: scale * ux,
                        gamma_y: scale * uy,
                        weight: wx * wy / (norm * norm),
                    });
                }
            }
            Ok(samples)
        }
    }
}
