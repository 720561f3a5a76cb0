use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The stationary law of the periodic chain is not unique
    /// (the full-period transfer matrix is the identity).
    #[error("degenerate chain: phi = {phi}, psi = {psi}; the stationary law is not unique")]
    DegenerateChain { phi: f64, psi: f64 },

    /// The closed-form power formula divides by `2 - M[0][0] - M[1][1]`,
    /// which vanishes for the identity. Callers return the identity directly.
    #[error("matrix is the identity; closed-form power is undefined")]
    IdentityMatrix,

    #[error("pre-factor product p*q is zero; the asymptotic formula is undefined")]
    ZeroPrefactor,

    #[error("no sign change of the derivative found on a grid of {grid_size} points")]
    BracketFailure { grid_size: usize },

    #[error("numeric classification found {maxima} maxima and {minima} minima; at most one of each is possible")]
    Ambiguous { maxima: usize, minima: usize },

    #[error("trajectory of length {len} is not a positive multiple of the period {period}")]
    LengthMismatch { len: usize, period: usize },

    #[error("integrator blew up at step {step} (|X| = {value})")]
    BlowUp { step: u64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
