//! Error type shared across the library.

use crate::chart::Chart;

/// Everything that can go wrong when evaluating geometric objects,
/// transforming coordinates, or integrating trajectories.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("chart mismatch: expected {expected}, got {got}")]
    ChartMismatch { expected: Chart, got: Chart },

    /// Point (or a finite-difference stencil node) left the chart's
    /// validity region.
    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A structural matrix or form is singular at this point
    /// (e.g. J1 = J2 for the S-bracket).
    #[error("singular structure: {0}")]
    SingularStructure(String),

    /// Operation requires a bound state (E < 0).
    #[error("unbound state: compact case requires E < 0, got E = {0}")]
    UnboundState(f64),

    /// Operation requires a strictly positive deformation parameter.
    #[error("deformation required: alpha must be > 0, got {0}")]
    DeformationRequired(f64),

    /// The su(2) constraint surface has no real momentum at this point.
    #[error("constraint infeasible: {0}")]
    ConstraintInfeasible(String),

    /// A wedge/Jacobian non-degeneracy condition fails at this point.
    #[error("degenerate structure: {0}")]
    Degenerate(String),

    /// Integrator could not advance (step underflow or step budget spent).
    #[error("step failure: {0}")]
    StepFailure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
