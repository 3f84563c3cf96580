//! Error type shared by all modules of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by model validation, analytic kernels and simulators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model parameter is outside its admissible range. The message names
    /// the violated invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The operation needs the continuous-time layer (rates) but the spec
    /// has none.
    #[error("operation requires a continuous-time layer (lambda, r0)")]
    MissingCtLayer,

    /// Requested an invariant measure for a transient chain.
    #[error("no invariant measure: {0}")]
    NoInvariantMeasure(String),

    /// A series or integral does not converge for the requested arguments.
    #[error("divergent: {0}")]
    Divergent(String),

    /// The argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity is undefined for this chain (e.g. stationary pgf of a
    /// null-recurrent chain).
    #[error("undefined: {0}")]
    Undefined(String),

    /// The canonical-sequence machinery does not apply (pi_0 = 0).
    #[error("not applicable: {0}")]
    NotApplicable(String),
}
