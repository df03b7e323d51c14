//! Simulation toolkit for attosecond quantum interferometry: high-harmonic
//! generation driven by a strong coherent field at frequency `ω` plus a
//! perturbative second harmonic carrying squeezed (or thermal) statistics.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`field`] — classical field realizations sampled from the limiting
//!    phase-space distribution of the `2ω` driver, in the rotated frame that
//!    keeps the squeezing type fixed as the two-color phase `φ` varies.
//! 2. [`dipole`] — time-dependent dipole expectation for each realization via
//!    the strong-field approximation, and its harmonic spectrum.
//! 3. [`phasespace`] — the post-limit quantum state of each harmonic mode as
//!    a weighted mixture of coherent states.
//! 4. [`observables`] / [`wigner`] / [`tomography`] / [`analysis`] — photon
//!    statistics, quadrature variances, intermode correlations, entanglement
//!    entropy, phase-space distributions, homodyne-style sampling with
//!    inverse-Radon reconstruction, and time-frequency diagnostics.
//!
//! All quantities are in atomic units unless stated otherwise. Quadratures
//! are dimensionless with the vacuum variance fixed at 0.5.

pub mod analysis;
pub mod cache;
pub mod config;
pub mod dipole;
pub mod error;
pub mod field;
pub mod observables;
pub mod phasespace;
pub mod pipeline;
pub mod quadrature;
pub mod tomography;
pub mod wigner;

pub use config::{DriverConfig, Envelope, SqueezeAxis, SqueezeKind, SqueezingSpec, TimeGrid};
pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
