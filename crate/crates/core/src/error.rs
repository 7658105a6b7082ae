//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Evaluation outside the domain of a function (time outside a segment or
    /// schedule horizon, non-positive frequency in a thermal occupation, ...).
    Domain(String),
    /// Invalid parameter combination (pulse width exceeding the period,
    /// non-positive horizon, unsatisfiable jitter ranges, ...).
    Parameter(String),
    /// Caller broke an inter-argument contract (mismatched time grids,
    /// mismatched physical parameters, empty averaging window, ...).
    Contract(String),
    /// The amplitude norm |A1|^2 + |A2|^2 exceeded 1 + 1e-6, so the thermal
    /// closure of the observables is meaningless at this point.
    Physicality { time: f64, norm_sq: f64 },
    /// A numerical procedure failed or would be unreliable (eigensolver
    /// non-convergence, root residual too large, unstable step size, ...).
    Numerical(String),
    /// The cross-coupling coefficient is exactly zero: the two modes evolve
    /// independently and the per-mode quadratic pathway must be used instead
    /// of the quartic mode-ratio formula.
    DecoupledCross,
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Parameter(m) => write!(f, "parameter error: {m}"),
            Error::Contract(m) => write!(f, "contract error: {m}"),
            Error::Physicality { time, norm_sq } => write!(
                f,
                "physicality error: |A1|^2 + |A2|^2 = {norm_sq:.9} > 1 + 1e-6 at t = {time:.9}"
            ),
            Error::Numerical(m) => write!(f, "numerical error: {m}"),
            Error::DecoupledCross => write!(
                f,
                "cross coupling is exactly zero: modes are decoupled, use the per-mode quadratic pathway"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
