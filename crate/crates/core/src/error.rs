use thiserror::Error;

use crate::config::ConfigError;
use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("tangent vector is zero; the metric is not differentiable there")]
    ZeroDirection,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("a(x) is not positive definite at {at:?}")]
    NotPositiveDefinite { at: Vec<f64> },
    #[error("a is not symmetric: a{i}{j} differs from a{j}{i}")]
    NotSymmetric { i: usize, j: usize },
    #[error("metric value {value} is not positive at x={x:?}, y={y:?}")]
    MetricPositivity { value: f64, x: Vec<f64>, y: Vec<f64> },
    #[error("fundamental tensor is singular at x={x:?}, y={y:?}")]
    SingularTensor { x: Vec<f64>, y: Vec<f64> },
    #[error("the 1-form is not closed on patch `{patch}` (max |dβ| = {max_residual:e})")]
    NotClosed { patch: String, max_residual: f64 },
    #[error("point {x:?} lies outside the patch domain")]
    OutsideDomain { x: Vec<f64> },
    #[error("distance {from:?} -> {to:?} did not converge (best value {value})")]
    NotConverged { from: Vec<f64>, to: Vec<f64>, value: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Expr(_) => "expression",
            Error::Config(_) => "config",
            Error::ZeroDirection => "zero-direction",
            Error::Dimension { .. } => "dimension",
            Error::NotPositiveDefinite { .. } => "not-positive-definite",
            Error::NotSymmetric { .. } => "not-symmetric",
            Error::MetricPositivity { .. } => "metric-positivity",
            Error::SingularTensor { .. } => "singular-tensor",
            Error::NotClosed { .. } => "not-closed",
            Error::OutsideDomain { .. } => "outside-domain",
            Error::NotConverged { .. } => "not-converged",
            Error::Invalid(_) => "invalid",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
