//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by construction and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical argument is outside the domain of the operation
    /// (e.g. a non-positive wavelength).
    #[error("domain error: {0}")]
    Domain(String),

    /// A construction parameter violates a configuration constraint
    /// (e.g. an odd grid size, a mask excursion beyond the sampling guard).
    #[error("configuration error: {0}")]
    Config(String),

    /// Two values that must belong together do not
    /// (e.g. spectrum and filter built on different grids).
    #[error("usage error: {0}")]
    Usage(String),

    /// A requested coordinate falls outside the sampled axis.
    #[error("range error: {0}")]
    Range(String),

    /// An internal numerical step failed (calibration root not bracketed, ...).
    #[error("internal error: {0}")]
    Internal(String),

    /// A width query on a correlation function with several tied peaks.
    /// Carries the full width at half maximum of each lobe instead.
    #[error("multimodal correlation function: {} lobes, per-lobe FWHM {:?}", lobe_fwhms.len(), lobe_fwhms)]
    Multimodal { lobe_fwhms: Vec<f64> },

    /// Text import of a mask did not match the expected grid.
    #[error("grid mismatch on import: {0}")]
    GridMismatch(String),

    /// Malformed text data on import.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
