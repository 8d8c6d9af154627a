//! Crate-wide error type.

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes of the library.
///
/// Values embedded in messages are carried as `f64` regardless of the
/// working scalar so the error type stays non-generic.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input that must be finite was NaN or infinite.
    #[error("non-finite input: {quantity}")]
    NonFinite {
        /// Which argument was non-finite.
        quantity: &'static str,
    },

    /// An argument fell outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set violated its invariants (positivity, n ≥ 1, …).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A tuning requirement set admits no power-law exponent n > 1.
    #[error("infeasible requirements: {0}")]
    Infeasible(String),

    /// A simulation produced a non-finite state.
    #[error("divergence at step {step} (t = {time} s): {quantity} is non-finite")]
    Divergence {
        /// Index of the offending step.
        step: usize,
        /// Simulated time at that step, in seconds.
        time: f64,
        /// Which state variable went non-finite.
        quantity: &'static str,
    },

    /// A simulation or measurement configuration is unusable.
    #[error("config error: {0}")]
    Config(String),

    /// A trace did not settle, so a steady-state metric is undefined.
    #[error("steady state not reached: {0}")]
    NoSteadyState(String),

    /// A frequency-response curve never crossed the sought level.
    #[error("no {level_db} dB crossing inside the swept frequency range")]
    NoCrossing {
        /// The sought drop below the low-frequency gain, in dB.
        level_db: f64,
    },

    /// Linear algebra failed in a way the preconditions should exclude.
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid_params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
}
