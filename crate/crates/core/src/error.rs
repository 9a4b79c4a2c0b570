//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building states, observables, or
/// running integrators. Diagnostic magnitudes are carried as `f64`
/// regardless of the working scalar so messages stay printable.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {max_asymmetry:.3e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not unitary (max |U U^H - I| = {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("not a valid density matrix: {reason}")]
    BadDensity { reason: String },

    #[error("dimension {dim} not supported: {reason}")]
    BadDimension { dim: usize, reason: &'static str },

    #[error("invalid argument `{name}`: {reason}")]
    BadArgument { name: &'static str, reason: String },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("integration step rejected: {reason}")]
    StepRejected { reason: String },

    #[error("quadrature failed to reach requested accuracy (estimated error {error:.3e}, budget {budget:.3e})")]
    QuadratureAccuracy { error: f64, budget: f64 },
}

impl Error {
    /// Shorthand for the common argument-validation case.
    pub fn bad_arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::BadArgument {
            name,
            reason: reason.into(),
        }
    }
}
