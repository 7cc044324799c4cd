use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants fall in two families: configuration problems that a caller can
/// fix by changing inputs (`is_config_error`), and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not reach relative tolerance {tol:e} on [{a}, {b}] (estimate {estimate:e})")]
    QuadratureNotConverged {
        a: f64,
        b: f64,
        tol: f64,
        estimate: f64,
    },

    #[error("probe radius {radius} lies inside the density core (transition radius {core})")]
    ProbeInsideCore { radius: f64, core: f64 },

    #[error("kernel under-resolved: h = {h} < 3 * spacing = {min}")]
    KernelUnderResolved { h: f64, min: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst Ritz residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("shift {shift} hits an eigenvalue after {attempts} perturbations")]
    ShiftHitsEigenvalue { shift: f64, attempts: usize },

    #[error("need at least 3 step sizes for an order fit, got {0}")]
    InsufficientHPoints(usize),

    #[error("operation requires a {expected} density, got {found}")]
    WrongDensityKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("rejection sampler exceeded {0} trials")]
    RejectionBudgetExceeded(usize),

    #[error("witness hypothesis violated: |x| = {norm} < tau + (n+1)h = {required}")]
    WitnessHypothesisViolated { norm: f64, required: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed banded matrix file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ProbeInsideCore { .. }
                | Error::KernelUnderResolved { .. }
                | Error::InsufficientHPoints(_)
                | Error::WrongDensityKind { .. }
                | Error::WitnessHypothesisViolated { .. }
                | Error::InvalidConfig(_)
                | Error::Format(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
