//! Driver configuration: the physical specification of the two-color field,
//! squeezing, target atom, and pulse, plus loading/validation.
//!
//! Configs are stored as TOML with every quantity in atomic units. All keys
//! except the squeezing section have defaults matching the reference
//! parameter set (`E_ω = 0.053`, `ω = 0.057`, `E_2ω = 10⁻² E_ω`,
//! `I_p = 0.5`, five optical cycles, `I_squ = 10⁻⁶`):
//!
//! ```toml
//! omega = 0.057            # fundamental angular frequency
//! e_omega = 0.053          # fundamental field strength
//! epsilon_ratio = 0.01     # 2ω/ω amplitude ratio ε (must stay < 0.2)
//! phi = 0.0                # two-color phase delay, in [0, 2π)
//! ip = 0.5                 # ionization potential
//! n_cycles = 5             # pulse duration in optical cycles of ω
//! envelope = "sin2"        # "sin2" | "flat"
//! # rho_coupling = 0.35    # optional; omitted -> calibrated downstream
//!
//! [squeezing]
//! kind = "squeezed"        # "coherent" | "squeezed" | "thermal"
//! i_squ = 1e-6             # squeezing intensity (field-fluctuation units)
//! axis = "amplitude"       # quadrature of the 2ω field with reduced noise
//!
//! [time_grid]
//! t_start = 0.0
//! # t_end = 551.2          # optional; omitted -> t_start + n_cycles·2π/ω
//! n_steps = 8192
//!
//! [sampling]
//! # n_samples = 21         # quadrature nodes (per axis for thermal kind)
//! ```

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Pulse envelope applied to the total field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Envelope {
    Flat,
    Sin2,
}

/// Statistics of the `2ω` driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SqueezeKind {
    Coherent,
    Squeezed,
    Thermal,
}

/// Quadrature of the `2ω` field whose fluctuations are squeezed (reduced).
///
/// In the rotated `γ` frame the squeezed quadrature collapses to a delta in
/// the classical limit, while the orthogonal one carries the enlarged
/// Gaussian variance `ς = 4·I_squ`. `Amplitude` squeezing therefore puts the
/// surviving fluctuations along the phase direction `γ_y`, and `Phase`
/// squeezing along `γ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SqueezeAxis {
    Amplitude,
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSpec {
    pub kind: SqueezeKind,
    /// Squeezing intensity `I_squ` in field-fluctuation units (a.u.²).
    pub i_squ: f64,
    pub axis: SqueezeAxis,
}

impl SqueezingSpec {
    pub fn coherent() -> Self {
        SqueezingSpec {
            kind: SqueezeKind::Coherent,
            i_squ: 0.0,
            axis: SqueezeAxis::Amplitude,
        }
    }

    /// Variance `ς = 4·I_squ` of the limiting Gaussian along the
    /// fluctuation-carrying axis.
    pub fn variance(&self) -> f64 {
        4.0 * self.i_squ
    }
}

/// Uniform time grid: `n_steps` samples `t_j = t_start + j·dt` with
/// `dt = (t_end − t_start)/n_steps`. The endpoint `t_end` is excluded so a
/// grid spanning an integer number of cycles discretizes harmonics exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    pub fn total(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t_start + index as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_steps).map(|j| self.time(j)).collect()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t <= self.t_end
    }
}

/// Full physical specification of a run. See the module docs for the file
/// schema; all quantities are in atomic units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverConfig {
    /// Fundamental angular frequency ω.
    pub omega: f64,
    /// Fundamental field strength E_ω.
    pub e_omega: f64,
    /// Dimensionless 2ω/ω amplitude ratio ε.
    pub epsilon_ratio: f64,
    /// Two-color phase delay φ in \[0, 2π).
    pub phi: f64,
    pub squeezing: SqueezingSpec,
    /// Ionization potential I_p.
    pub ip: f64,
    pub n_cycles: u32,
    pub envelope: Envelope,
    pub time_grid: TimeGrid,
    /// Effective coupling ϱ scaling dipole spectral amplitudes into coherent
    /// amplitudes. `None` requests downstream calibration
    /// ([`crate::pipeline::calibrate_rho`]).
    pub rho_coupling: Option<f64>,
    /// Phase-space quadrature nodes (per axis for the thermal kind). `None`
    /// selects the kind-dependent default: 21 (squeezed/coherent), 11
    /// (thermal, i.e. an 11×11 grid).
    pub n_samples: Option<usize>,
}

impl Default for DriverConfig {
    fn default() -> Self {
        let omega = 0.057;
        let n_cycles = 5;
        DriverConfig {
            omega,
            e_omega: 0.053,
            epsilon_ratio: 1e-2,
            phi: 0.0,
            squeezing: SqueezingSpec {
                kind: SqueezeKind::Squeezed,
                i_squ: 1e-6,
                axis: SqueezeAxis::Amplitude,
            },
            ip: 0.5,
            n_cycles,
            envelope: Envelope::Sin2,
            time_grid: TimeGrid {
                t_start: 0.0,
                t_end: n_cycles as f64 * TAU / omega,
                n_steps: 8192,
            },
            rho_coupling: None,
            n_samples: None,
        }
    }
}

impl DriverConfig {
    /// Mean 2ω field amplitude `ε·E_ω`.
    pub fn two_color_amplitude(&self) -> f64 {
        self.epsilon_ratio * self.e_omega
    }

    /// One optical cycle of the fundamental, `2π/ω`.
    pub fn cycle_period(&self) -> f64 {
        TAU / self.omega
    }

    pub fn effective_n_samples(&self) -> usize {
        self.n_samples.unwrap_or(match self.squeezing.kind {
            SqueezeKind::Thermal => 11,
            _ => 21,
        })
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        let mut c = self.clone();
        c.phi = phi;
        c
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        let mut c = self.clone();
        c.rho_coupling = Some(rho);
        c
    }

    /// Content hash of the resolved config (hex SHA-256 of its canonical
    /// JSON form). Identifies runs in manifests and output sidecars.
    pub fn content_hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    /// Check all config invariants. Returns non-fatal warnings on success;
    /// the first violated invariant is reported as a [`Error::Validation`]
    /// naming the offending field.
    pub fn validate(&self) -> Result<Vec<String>> {
        fn fail(field: &str, message: impl Into<String>) -> Error {
            Error::Validation {
                field: field.into(),
                message: message.into(),
            }
        }

        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(fail("omega", "must be a positive finite frequency"));
        }
        if !(self.e_omega.is_finite() && self.e_omega > 0.0) {
            return Err(fail("e_omega", "must be a positive finite field strength"));
        }
        if !(self.epsilon_ratio.is_finite() && (0.0..0.2).contains(&self.epsilon_ratio)) {
            return Err(fail(
                "epsilon_ratio",
                format!(
                    "ε = {} outside the perturbative range [0, 0.2)",
                    self.epsilon_ratio
                ),
            ));
        }
        if !(self.phi.is_finite() && (0.0..TAU).contains(&self.phi)) {
            return Err(fail("phi", "two-color phase must lie in [0, 2π)"));
        }
        if !(self.ip.is_finite() && self.ip > 0.0) {
            return Err(fail("ip", "ionization potential must be positive"));
        }
        if self.n_cycles == 0 {
            return Err(fail("n_cycles", "pulse must span at least one cycle"));
        }
        if !(self.squeezing.i_squ.is_finite() && self.squeezing.i_squ >= 0.0) {
            return Err(fail("squeezing.i_squ", "squeezing intensity must be ≥ 0"));
        }
        if self.squeezing.kind == SqueezeKind::Coherent && self.squeezing.i_squ != 0.0 {
            return Err(fail(
                "squeezing.i_squ",
                "coherent kind forces I_squ = 0",
            ));
        }
        let grid = &self.time_grid;
        if grid.n_steps < 2 || !(grid.t_end > grid.t_start) {
            return Err(fail("time_grid", "need t_end > t_start and n_steps ≥ 2"));
        }
        let expected_span = self.n_cycles as f64 * self.cycle_period();
        if (grid.total() - expected_span).abs() > 1e-9 * expected_span {
            return Err(fail(
                "time_grid",
                format!(
                    "grid spans {:.6} a.u. but n_cycles·2π/ω = {:.6}; integer-cycle \
                     grids keep harmonic orders on exact frequency bins",
                    grid.total(),
                    expected_span
                ),
            ));
        }
        // Time step must resolve harmonic 2·q_cutoff.
        let q_cutoff = crate::dipole::cutoff_estimate(self);
        let min_steps = 4 * q_cutoff as usize * self.n_cycles as usize;
        if grid.n_steps < min_steps {
            return Err(fail(
                "time_grid.n_steps",
                format!(
                    "{} steps cannot resolve harmonic 2·q_cutoff = {}; need ≥ {}",
                    grid.n_steps,
                    2 * q_cutoff,
                    min_steps
                ),
            ));
        }
        if let Some(rho) = self.rho_coupling {
            if !(rho.is_finite() && rho > 0.0) {
                return Err(fail("rho_coupling", "must be positive when given"));
            }
        }
        if let Some(n) = self.n_samples {
            if n < 1 {
                return Err(fail("sampling.n_samples", "need at least one sample"));
            }
        }

        let mut warnings = Vec::new();
        if self.epsilon_ratio > 0.05 {
            warnings.push(format!(
                "epsilon_ratio = {} is large for the perturbative treatment (ε ≲ 0.05 expected)",
                self.epsilon_ratio
            ));
        }
        Ok(warnings)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimeGrid {
    #[serde(default)]
    t_start: f64,
    t_end: Option<f64>,
    n_steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    n_samples: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    omega: Option<f64>,
    e_omega: Option<f64>,
    epsilon_ratio: Option<f64>,
    phi: Option<f64>,
    squeezing: Option<SqueezingSpec>,
    ip: Option<f64>,
    n_cycles: Option<u32>,
    envelope: Option<Envelope>,
    time_grid: Option<RawTimeGrid>,
    rho_coupling: Option<f64>,
    sampling: Option<RawSampling>,
}

/// Parse a TOML config, fill defaults, and validate. Returns the resolved
/// config together with any validation warnings.
pub fn load_config(path: impl AsRef<Path>) -> Result<(DriverConfig, Vec<String>)> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config(&text)
}

/// Same as [`load_config`] from an in-memory TOML string.
pub fn parse_config(text: &str) -> Result<(DriverConfig, Vec<String>)> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Validation {
        field: "config".into(),
        message: e.to_string(),
    })?;
    let defaults = DriverConfig::default();
    let omega = raw.omega.unwrap_or(defaults.omega);
    let n_cycles = raw.n_cycles.unwrap_or(defaults.n_cycles);
    let (t_start, t_end, n_steps) = match raw.time_grid {
        Some(tg) => {
            let t_start = tg.t_start;
            let t_end = tg
                .t_end
                .unwrap_or_else(|| t_start + n_cycles as f64 * TAU / omega);
            (t_start, t_end, tg.n_steps.unwrap_or(defaults.time_grid.n_steps))
        }
        None => (
            0.0,
            n_cycles as f64 * TAU / omega,
            defaults.time_grid.n_steps,
        ),
    };
    let config = DriverConfig {
        omega,
        e_omega: raw.e_omega.unwrap_or(defaults.e_omega),
        epsilon_ratio: raw.epsilon_ratio.unwrap_or(defaults.epsilon_ratio),
        phi: raw.phi.unwrap_or(defaults.phi),
        squeezing: raw.squeezing.unwrap_or(defaults.squeezing),
        ip: raw.ip.unwrap_or(defaults.ip),
        n_cycles,
        envelope: raw.envelope.unwrap_or(defaults.envelope),
        time_grid: TimeGrid {
            t_start,
            t_end,
            n_steps,
        },
        rho_coupling: raw.rho_coupling,
        n_samples: raw.sampling.and_then(|s| s.n_samples),
    };
    let warnings = config.validate()?;
    Ok((config, warnings))
}
