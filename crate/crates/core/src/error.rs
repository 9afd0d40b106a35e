use thiserror::Error;

/// Errors produced by the scattering, symmetry, and time-evolution routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A pivot fell below the singularity threshold during LU elimination.
    /// Usually means the momentum sits at a band edge or on a spectral
    /// singularity of the center.
    #[error("singular matrix: pivot magnitude {pivot:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Frequency outside the lead band, or momentum outside (-pi, 0).
    #[error("out of band: {0}")]
    OutOfBand(String),

    #[error("unknown lead id {0}")]
    UnknownLead(u32),

    #[error("input and output ports must be distinct leads (got lead {0} twice)")]
    SamePort(u32),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// The unitary operator of a symmetry spec violates the constraints of
    /// its kind (unitarity, u u* = +-1 for C/K, u^2 = 1 for Q/P).
    #[error("invalid symmetry operator: {0}")]
    InvalidOperator(String),

    #[error("symmetry not satisfied: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    SymmetryNotSatisfied { residual: f64, tol: f64 },

    /// Reflection coefficients computed through different partner ports
    /// disagree. Indicates a bug or a divergent scattering point.
    #[error("inconsistent reflection at lead {lead}: spread {spread:.3e} across partner ports")]
    InconsistentReflection { lead: u32, spread: f64 },

    #[error("packet does not fit on the lead: {0}")]
    PacketDoesNotFit(String),

    #[error("packet has not cleared the center: residual center intensity {0:.3e}")]
    PacketNotCleared(f64),

    /// Runaway amplitude during time evolution (net gain in the center).
    #[error("time evolution unstable: amplitude magnitude reached {0:.3e}")]
    Instability(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
