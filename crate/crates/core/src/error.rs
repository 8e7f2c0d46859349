use thiserror::Error;

/// Every failure the analysis routines can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("not an equilibrium: residual {residual:e}")]
    NotAnEquilibrium { residual: f64 },
    #[error("Newton polish did not converge: {0}")]
    NoConvergence(String),
    #[error("degenerate resolvent: |Q2| = {q2:e} (biquadratic case)")]
    DegenerateResolvent { q2: f64 },
    #[error("quartic coefficient {name} mismatch: printed {printed}, derived {derived}")]
    CoefficientMismatch {
        name: &'static str,
        printed: f64,
        derived: f64,
    },
    #[error("equilibrium not present: {0}")]
    NotPresent(String),
    #[error("no Hopf point: {0}")]
    NoHopf(String),
    #[error("interior branch lost on [{lo}, {hi}]: {reason}")]
    BranchLost { lo: f64, hi: f64, reason: String },
    #[error("no Bogdanov-Takens candidate: {0}")]
    NoCandidate(String),
    #[error("singular linear solve: |1 - b2 a2| = {0:e}")]
    SingularSolve(f64),
    #[error("degenerate Bogdanov-Takens point: {condition} fails ({value:e})")]
    DegenerateBT { condition: &'static str, value: f64 },
    #[error("integration step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("limit-cycle probe inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
