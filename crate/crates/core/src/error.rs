use thiserror::Error;

/// Errors raised by the geometric and dynamical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("augmented dimension must be at least 3, got {0}")]
    InvalidDimension(usize),

    #[error("point outside the augmented space: {0}")]
    Domain(String),

    #[error("singular central potential at radius {0:e}")]
    SingularPotential(f64),

    #[error("rectilinear motion: specific angular momentum {0:e} is below threshold")]
    Rectilinear(f64),

    #[error("non-oscillatory fiber dynamics: beta^2 = {0:e} <= 0")]
    NonOscillatory(f64),

    #[error("angular momentum of the initial state differs from the frozen value (relative {0:e})")]
    AngularMomentumMismatch(f64),

    #[error("state is not on the invariant submanifold: residual ({0:e}, {1:e})")]
    OffConstraint(f64, f64),

    #[error("normal coordinate reaches zero (escape) at tau = {0}")]
    Escape(f64),

    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("integration left the domain at parameter {param}: {reason}")]
    DomainExit { param: f64, reason: String },

    #[error("step limit of {0} steps exhausted")]
    StepLimit(usize),

    #[error("step size underflow at parameter {0}")]
    StepUnderflow(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
