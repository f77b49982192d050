//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by table construction, providers, quadrature, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A table build would exceed the configured memory budget.
    #[error("capacity exceeded: requested {requested} entries, budget {budget}")]
    Capacity { requested: u64, budget: u64 },

    /// A divisor table does not extend far enough for the requested range.
    #[error("table too small: need n_max >= {needed}, table has n_max = {have}")]
    Range { needed: u64, have: u64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Persisted table is corrupt: bad magic, version, length, or checksum.
    #[error("table format error: {0}")]
    Format(String),

    /// A coefficient provider has no data for the requested (k, q).
    #[error("provider '{provider}' has no coefficients for k={k}, q={q}")]
    Provider { provider: String, k: u32, q: u64 },

    /// Two independent evaluation routes disagreed beyond tolerance.
    #[error("consistency check failed: {0}")]
    Consistency(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    /// The requested accuracy cannot be delivered for this argument.
    #[error("accuracy {target:e} unachievable at t={t}")]
    Accuracy { target: f64, t: f64 },

    /// FFT-based correlation produced a value too far from an integer.
    #[error("fft correlation at lag {lag}: distance {distance} from nearest integer exceeds 0.5")]
    FftPrecision { lag: u64, distance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
