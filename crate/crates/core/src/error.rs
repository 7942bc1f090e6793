use thiserror::Error;

/// Errors raised by geometry, flow, verification and construction routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({q1}, {q2}) lies outside the chart domain")]
    Domain { q1: f64, q2: f64 },

    #[error("metric is singular or not positive-definite at ({q1}, {q2}): det = {det}")]
    SingularMetric { q1: f64, q2: f64, det: f64 },

    #[error("adaptive step size underflow at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },

    #[error("scalar undefined along trajectory at t = {t}: {reason}")]
    Evaluation { t: f64, reason: String },

    #[error("guard rejected evaluation: {0}")]
    Guard(String),

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian (det = {det:e})")]
    SingularJacobian { det: f64 },

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("degenerate condition D = {d:e} at (rho, psi) = ({rho}, {psi})")]
    DegenerateD { d: f64, rho: f64, psi: f64 },

    #[error("evaluation too close to a pole (|denominator| = {value:e})")]
    NearPole { value: f64 },

    #[error("hypergeometric series did not converge within {terms} terms")]
    SeriesDivergence { terms: usize },

    #[error("hypergeometric parameter c = {c} is a nonpositive integer")]
    PoleInC { c: f64 },

    #[error("coefficient overflow for k = {k} (supported k <= {limit})")]
    Overflow { k: usize, limit: usize },

    #[error("unknown example '{0}'")]
    UnknownExample(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
