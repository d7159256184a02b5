//! Error type shared by all numerical modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Argument outside the validity domain of a formula or scheme.
    #[error("domain error in {context}: {message}")]
    Domain { context: String, message: String },

    /// Requested value outside an achievable physical range.
    #[error("range error in {context}: target {target} outside achievable [{lo}, {hi}]")]
    Range {
        context: String,
        target: f64,
        lo: f64,
        hi: f64,
    },

    /// Matrix failed a structural validation (Hermiticity, dimensions).
    #[error("validation error: {0}")]
    Validation(String),

    /// Eigendecomposition produced residuals beyond the contract bound.
    #[error("eigensolver residual {residual:.3e} exceeds bound {bound:.3e}")]
    EigenResidual { residual: f64, bound: f64 },

    /// Phase accumulation crossed a site with amplitude below threshold.
    #[error(
        "path error: phase undefined through dark site (n={n}, m={m}), amplitude {amplitude:.3e}"
    )]
    DarkSitePath { n: i64, m: i64, amplitude: f64 },

    /// Nonlinear fit failed to converge.
    #[error("fit error: {message} (residual RMS {residual_rms:.3e})")]
    Fit { message: String, residual_rms: f64 },

    /// Time grid violates the Nyquist bound of the requested spectrum.
    #[error("sampling error: time step {dt:.3e} exceeds Nyquist limit {limit:.3e}")]
    Nyquist { dt: f64, limit: f64 },

    /// Peak search found nothing above threshold.
    #[error("no peak above threshold {threshold:.3e} (max value {max_value:.3e})")]
    NoPeak { threshold: f64, max_value: f64 },

    /// Discretized-zone result failed its admissibility certificate.
    #[error("refinement error in {context}: {message}; try a denser k-grid")]
    Refinement { context: String, message: String },
}

impl CoreError {
    pub fn domain(context: impl Into<String>, message: impl Into<String>) -> Self {
        CoreError::Domain {
            context: context.into(),
            message: message.into(),
        }
    }
}

/// Non-fatal precondition report attached to results whose approximations
/// the inputs strain.
#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub context: String,
    pub message: String,
}

impl Warning {
    pub fn new(context: impl Into<String>, message: impl Into<String>) -> Self {
        Warning {
            context: context.into(),
            message: message.into(),
        }
    }
}
