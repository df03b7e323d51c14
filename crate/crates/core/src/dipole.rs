//! Time-dependent dipole expectation for each field realization via the
//! strong-field approximation, and its harmonic spectrum.
//!
//! The dipole is the Lewenstein integral over ionization time with
//! saddle-point (stationary) momentum,
//!
//! ```text
//! d(t) = 2 Im ∫ dt' E(t')·d*(p_st + A(t))·d(p_st + A(t'))
//!               ·(π/(ϵ_reg + i(t−t')/2))^{3/2}·exp(−i S_st(t,t'))
//! ```
//!
//! with the hydrogen-like bound-state matrix element
//! `d(p) ∝ p/(p² + 2·I_p)³`, vector potential `A = −∫E`, and the stationary
//! action evaluated from running integrals of `A` and `A²`. The ionization
//! integral is truncated at excursion times of 1.5 optical cycles; the
//! `(t−t')^{3/2}` spreading factor is regularized by `ϵ_reg` at `t' → t`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cache::{record_key, DipoleCache};
use crate::config::{DriverConfig, Envelope, TimeGrid};
use crate::error::{Error, Result};
use crate::field::{field_series_extended, PhaseSpaceSample};

/// Regularization of the excursion-time spreading factor (a.u.).
pub const EPS_REG: f64 = 1e-6;

/// Excursion-time truncation in optical cycles.
pub const TAU_MAX_CYCLES: f64 = 1.5;

/// Spectral window applied before the discrete Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralWindow {
    None,
    Hann,
}

/// Leakage-control default: flat-top pulses need no window, sin² pulses get
/// a Hann window.
pub fn default_window(envelope: Envelope) -> SpectralWindow {
    match envelope {
        Envelope::Flat => SpectralWindow::None,
        Envelope::Sin2 => SpectralWindow::Hann,
    }
}

/// Dipole response of one field realization.
///
/// `spectrum[n]` holds the windowed discrete Fourier transform
/// `Δt·Σ_j w_j d_j exp(−i ω_n (t_j − t_start))` on the grid
/// `ω_n = n·2π/T_total`; `q_values[n] = ω_n/ω`. Phases are referenced to the
/// pulse start, so the spectrum of the real series obeys exact conjugate
/// symmetry between bins `n` and `N − n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DipoleRecord {
    pub sample_id: usize,
    pub d_t: Vec<f64>,
    pub spectrum: Vec<C64>,
    pub q_values: Vec<f64>,
    pub window: SpectralWindow,
    pub time_grid: TimeGrid,
    pub omega: f64,
}

impl DipoleRecord {
    /// Build a record from a raw time series: applies `window` and stores the
    /// full discrete spectrum.
    pub fn from_time_series(
        sample_id: usize,
        d_t: Vec<f64>,
        time_grid: TimeGrid,
        omega: f64,
        window: SpectralWindow,
    ) -> Result<Self> {
        if d_t.len() != time_grid.n_steps {
            return Err(Error::InvalidArgument(format!(
                "time series has {} samples, grid has {}",
                d_t.len(),
                time_grid.n_steps
            )));
        }
        let n = d_t.len();
        let dt = time_grid.dt();
        let mut buf: Vec<C64> = d_t
            .iter()
            .enumerate()
            .map(|(j, &d)| C64::new(d * window_value(window, j, n), 0.0))
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let spectrum: Vec<C64> = buf.into_iter().map(|v| v * dt).collect();
        let dq = std::f64::consts::TAU / (time_grid.total() * omega);
        let q_values = (0..n).map(|j| j as f64 * dq).collect();
        Ok(DipoleRecord {
            sample_id,
            d_t,
            spectrum,
            q_values,
            window,
            time_grid,
            omega,
        })
    }

    /// Spectrum value at harmonic order `q`, which must sit on the stored
    /// frequency grid (no interpolation) below Nyquist.
    pub fn spectrum_at(&self, q: f64) -> Result<C64> {
        let dq = self.q_values.get(1).copied().unwrap_or(1.0);
        let idx = (q / dq).round();
        if (q - idx * dq).abs() > 1e-9 * dq.max(1.0) || idx < 0.0 {
            return Err(Error::OffGridHarmonic { q });
        }
        let idx = idx as usize;
        if idx > self.spectrum.len() / 2 {
            return Err(Error::OffGridHarmonic { q });
        }
        Ok(self.spectrum[idx])
    }
}

fn window_value(window: SpectralWindow, j: usize, n: usize) -> f64 {
    match window {
        SpectralWindow::None => 1.0,
        SpectralWindow::Hann => {
            let x = std::f64::consts::TAU * j as f64 / n as f64;
            0.5 * (1.0 - x.cos())
        }
    }
}

/// Cycle-averaged quiver energy `U_p = E_ω²/(4ω²)`.
pub fn ponderomotive_energy(config: &DriverConfig) -> f64 {
    let e = config.e_omega;
    e * e / (4.0 * config.omega * config.omega)
}

/// Semiclassical cutoff `(I_p + 3.17·U_p)/ω`, rounded to the nearest odd
/// harmonic order.
pub fn cutoff_estimate(config: &DriverConfig) -> u32 {
    let raw = (config.ip + 3.17 * ponderomotive_energy(config)) / config.omega;
    let odd = 2.0 * ((raw - 1.0) / 2.0).round() + 1.0;
    odd.max(1.0) as u32
}

fn cumtrapz(y: &[f64], dt: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(y.len());
    out.push(0.0);
    for pair in y.windows(2) {
        acc += 0.5 * dt * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}

/// Lewenstein SFA dipole for one field realization. Pure in its arguments;
/// the returned record carries `sample_id = 0` (ensemble evaluation assigns
/// positional ids).
pub fn sfa_dipole(config: &DriverConfig, sample: &PhaseSpaceSample) -> Result<DipoleRecord> {
    let grid = config.time_grid;
    let n = grid.n_steps;
    let dt = grid.dt();
    let k_max = ((TAU_MAX_CYCLES * config.cycle_period() / dt) as usize).min(n - 1);
    // Every emission time gets a full excursion history: the grid is
    // extended k_max steps into the past, where a flat (CW) driver keeps
    // oscillating and a sin² pulse is dark. Kills the turn-on transient that
    // would otherwise contaminate the even/odd harmonic structure.
    let e = field_series_extended(sample, config, k_max);

    // A = −∫E and the running integrals entering p_st and S_st (the
    // additive constant of A is gauge; it drops out of v and S).
    let a = {
        let mut a = cumtrapz(&e, dt);
        a.iter_mut().for_each(|v| *v = -*v);
        a
    };
    let ia = cumtrapz(&a, dt);
    let a_sq: Vec<f64> = a.iter().map(|v| v * v).collect();
    let ia2 = cumtrapz(&a_sq, dt);

    // Spreading factor by excursion step count; index 0 (τ = 0) is unused
    // because that endpoint contributes no imaginary part.
    let spread: Vec<C64> = (0..=k_max)
        .map(|k| {
            let pi = std::f64::consts::PI;
            (C64::new(pi, 0.0) / C64::new(EPS_REG, 0.5 * k as f64 * dt)).powf(1.5)
        })
        .collect();

    let two_ip = 2.0 * config.ip;
    // |C|² for d(p) = i·C·p/(p² + 2I_p)³ with C = 2^{7/2}(2I_p)^{5/4}/π.
    let mel_norm = 128.0 * two_ip.powf(2.5) / (std::f64::consts::PI * std::f64::consts::PI);

    let mut d_t = vec![0.0; n];
    for i in 0..n {
        let ie = i + k_max;
        let j_min = ie - k_max;
        let mut acc = C64::new(0.0, 0.0);
        for j in j_min..ie {
            let tau = (ie - j) as f64 * dt;
            let d_ia = ia[ie] - ia[j];
            let p_st = -d_ia / tau;
            let action =
                config.ip * tau + 0.5 * (ia2[ie] - ia2[j]) - d_ia * d_ia / (2.0 * tau);
            let va = p_st + a[ie];
            let vb = p_st + a[j];
            let mel = mel_norm * va * vb
                / ((va * va + two_ip).powi(3) * (vb * vb + two_ip).powi(3));
            let weight = if j == j_min { 0.5 } else { 1.0 };
            let term = spread[ie - j] * C64::from_polar(weight * e[j] * mel, -action);
            acc += term;
        }
        let value = 2.0 * acc.im * dt;
        if !value.is_finite() {
            // Locate the first offending pair for the diagnostic.
            let t = grid.time(i);
            for j in j_min..ie {
                let tau = (ie - j) as f64 * dt;
                let d_ia = ia[ie] - ia[j];
                let action =
                    config.ip * tau + 0.5 * (ia2[ie] - ia2[j]) - d_ia * d_ia / (2.0 * tau);
                if !action.is_finite() || !(ia[j].is_finite() && e[j].is_finite()) {
                    return Err(Error::Numerical {
                        context: "sfa_dipole".into(),
                        t,
                        t_prime: t - tau,
                    });
                }
            }
            return Err(Error::Numerical {
                context: "sfa_dipole".into(),
                t,
                t_prime: t,
            });
        }
        d_t[i] = value;
    }

    DipoleRecord::from_time_series(0, d_t, grid, config.omega, default_window(config.envelope))
}

/// Windowed discrete Fourier transform of a record's time series, sampled at
/// integer and half-integer harmonic orders up to Nyquist. Evaluated by
/// direct summation so the orders are hit exactly regardless of grid length.
#[derive(Debug, Clone)]
pub struct HarmonicSpectrum {
    pub q: Vec<f64>,
    pub values: Vec<C64>,
}

pub fn harmonic_spectrum(record: &DipoleRecord, window: SpectralWindow) -> HarmonicSpectrum {
    let n = record.d_t.len();
    let dt = record.time_grid.dt();
    let nyquist = record.q_values[n / 2];
    let n_q = (2.0 * nyquist).floor() as usize;
    let q: Vec<f64> = (1..=n_q).map(|k| 0.5 * k as f64).collect();
    let values: Vec<C64> = q
        .par_iter()
        .map(|&qk| {
            let w_angle = qk * record.omega * dt;
            let mut acc = C64::new(0.0, 0.0);
            for (j, &d) in record.d_t.iter().enumerate() {
                let s = d * window_value(window, j, n);
                acc += C64::from_polar(s, -w_angle * j as f64);
            }
            acc * dt
        })
        .collect();
    HarmonicSpectrum { q, values }
}

/// Measured harmonic cutoff: the last odd order whose intensity stays at
/// plateau level (within a fixed factor of the plateau median). A test and
/// diagnostics aid, not part of the physics pipeline.
pub fn measure_cutoff(record: &DipoleRecord) -> Option<u32> {
    let max_q = record.q_values[record.d_t.len() / 2].floor() as u32;
    let plateau: Vec<f64> = (9..=19)
        .step_by(2)
        .filter_map(|q| record.spectrum_at(q as f64).ok())
        .map(|v| v.norm_sqr())
        .collect();
    if plateau.is_empty() {
        return None;
    }
    let mut sorted = plateau.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let threshold = median / 10f64.powf(1.5);
    let mut cutoff = None;
    let mut q = 9;
    while q + 2 <= max_q {
        match record.spectrum_at(q as f64) {
            Ok(v) if v.norm_sqr() >= threshold => {
                cutoff = Some(q);
                q += 2;
            }
            _ => break,
        }
    }
    cutoff
}

/// One dipole record per sample, computed in parallel and optionally served
/// from the on-disk cache. Records are matched to samples positionally
/// (`sample_id = index`); results do not depend on evaluation order.
pub fn ensemble_dipoles(
    config: &DriverConfig,
    samples: &[PhaseSpaceSample],
    cache: Option<&DipoleCache>,
) -> Result<Vec<DipoleRecord>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "ensemble_dipoles needs a nonempty sample set".into(),
        ));
    }
    samples
        .par_iter()
        .enumerate()
        .map(|(idx, sample)| {
            let mut record = match cache {
                Some(store) => {
                    let key = record_key(config, sample);
                    match store.load(&key) {
                        Some(record) => record,
                        None => {
                            let record = sfa_dipole(config, sample)?;
                            store.store(&key, &record)?;
                            record
                        }
                    }
                }
                None => sfa_dipole(config, sample)?,
            };
            record.sample_id = idx;
            Ok(record)
        })
        .collect()
}
