use thiserror::Error;

/// Errors raised by the special functions, the modal solvers and the metrics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    /// The requested value cannot be delivered to the target precision.
    #[error("accuracy loss (estimated relative error {estimate:e}): {context}")]
    AccuracyLoss { estimate: f64, context: String },

    /// A plain (unscaled) value is not representable in double precision.
    #[error("value not representable without scaling: {0}")]
    Overflow(String),

    /// `z` sits on (or numerically at) a zero of `J_n`, so `J_n'/J_n` is not usable.
    #[error("argument is at a zero of J_{order} (|J/J'| = {residual:e})")]
    PoleProximity { order: usize, residual: f64 },

    /// A per-mode system is numerically singular; ω is at an interior resonance.
    #[error("near resonance in mode {mode}: {detail}")]
    NearResonance { mode: usize, detail: String },

    /// `J_n'(ωR)` (or its spherical analogue) vanishes; -ω² is a Neumann eigenvalue.
    #[error(
        "ωR is within {distance:e} of a zero of the derivative of the mode-{mode} radial function"
    )]
    EigenvalueProximity { mode: usize, distance: f64 },

    #[error("blow-up map evaluated within {0:e} of the branch interface")]
    Ambiguity(f64),

    #[error("push-forward requires a positive Jacobian determinant, got {0:e}")]
    Orientation(f64),

    /// Dense oracle solve is too ill-conditioned to be trusted.
    #[error("oracle unreliable: condition estimate {0:e}")]
    OracleUnreliable(f64),

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("modal truncation did not converge by order {0}")]
    TruncationUnconverged(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
