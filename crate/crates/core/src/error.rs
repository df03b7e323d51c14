//! Error types shared across the simulation pipeline.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field failed validation. `field` names the offending
    /// key so callers can produce structured reports.
    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input outside the domain an operation is defined on (e.g. a time
    /// outside the stored grid, or an all-zero phase-space grid).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical evaluation produced non-finite intermediates; carries the
    /// emission/ionization times at which the failure was detected.
    #[error("numerical failure in {context} at t = {t}, t' = {t_prime}")]
    Numerical {
        context: String,
        t: f64,
        t_prime: f64,
    },

    #[error("cache error at {path}: {message}")]
    Cache { path: PathBuf, message: String },

    /// Joint moments require mixtures built from one shared sample set.
    #[error("mixtures were built from different phase-space sample sets")]
    MismatchedSampleSets,

    /// g² is undefined when a mode carries no photons.
    #[error("correlation undefined: harmonic q = {q} has zero mean photon number")]
    UndefinedCorrelation { q: f64 },

    /// Mixtures are built only at harmonics on the record frequency grid.
    #[error("harmonic q = {q} is not on the record frequency grid")]
    OffGridHarmonic { q: f64 },

    /// Fock-basis truncation lost too much trace.
    #[error("Fock truncation at n_cutoff = {n_cutoff} keeps only trace = {trace:.6}")]
    TruncationDeficit { trace: f64, n_cutoff: usize },

    #[error("inverse Radon needs at least {need} phase settings, got {got}")]
    InsufficientProjections { got: usize, need: usize },

    /// The classical intensity inversion has no solution for these inputs
    /// (its preconditions fail e.g. for squeezed drivers).
    #[error("intensity inversion outside its domain: {0}")]
    InversionDomain(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    /// An observable evaluator failed on one mixture component.
    #[error("evaluator failed on component {sample_index}: {source}")]
    EvaluatorFailure {
        sample_index: usize,
        #[source]
        source: Box<Error>,
    },

    /// An upstream failure tagged with the pipeline stage or sweep point it
    /// occurred at (e.g. a φ setting).
    #[error("{context}: {source}")]
    Stage {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
