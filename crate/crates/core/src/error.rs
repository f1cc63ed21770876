use thiserror::Error;

use crate::integrate::IntegralResult;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid time scale: {0}")]
    InvalidScale(String),

    #[error("endpoint {0} is not a point of the time scale")]
    EndpointNotInScale(f64),

    #[error("restriction to [{a}, {b}] is empty")]
    EmptyRestriction { a: f64, b: f64 },

    #[error("{0} is not a point of the time scale")]
    PointNotInScale(f64),

    #[error("partitions have different endpoints: [{a1}, {b1}] vs [{a2}, {b2}]")]
    MismatchedEndpoints { a1: f64, b1: f64, a2: f64, b2: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("syntax error at column {column}: expected {}", expected.join(" or "))]
    Syntax { column: usize, expected: Vec<String> },

    #[error("arity error: {0}")]
    Arity(String),

    #[error("domain error: {what} at t={t}{}", s.map(|s| format!(", s={s}")).unwrap_or_default())]
    Domain { what: String, t: f64, s: Option<f64> },

    #[error("unknown convex function `{0}`")]
    UnknownConvexFn(String),

    #[error("delta derivative did not converge at t={t}: estimate {estimate}, error {error}")]
    NonConvergent { t: f64, estimate: f64, error: f64 },

    #[error("integrator is not non-decreasing near t={at}: drop of {drop}")]
    NonMonotoneIntegrator { at: f64, drop: f64 },

    #[error("selection point {x} of cell {index} is outside [{lo}, {hi})")]
    SelectionOutOfCell { index: usize, x: f64, lo: f64, hi: f64 },

    #[error("no convergence within {max_cells} cells (gap {})", partial.gap)]
    NoConvergence { max_cells: usize, partial: Box<IntegralResult> },

    #[error("{axis} integral: {source}")]
    Axis { axis: &'static str, source: Box<Error> },

    #[error("precondition violated: {what}{}", witness.map(|w| format!(" (witness t={w})")).unwrap_or_default())]
    PreconditionViolated { what: String, witness: Option<f64> },

    #[error("ordering violated at t={t}, s={s}: product {product}")]
    OrderingViolated { t: f64, s: f64, product: f64 },

    #[error("instance generator exhausted after {attempts} consecutive rejections: {last}")]
    GeneratorExhausted { attempts: usize, last: Box<Error> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Strips any axis annotation.
    pub fn root(&self) -> &Error {
        match self {
            Error::Axis { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failed hypotheses of an inequality check, as opposed to failed inequalities.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self.root(),
            Error::PreconditionViolated { .. }
                | Error::OrderingViolated { .. }
                | Error::NonMonotoneIntegrator { .. }
        )
    }

    pub fn is_no_convergence(&self) -> bool {
        matches!(self.root(), Error::NoConvergence { .. } | Error::NonConvergent { .. })
    }

    pub(crate) fn domain(what: impl Into<String>, t: f64, s: Option<f64>) -> Self {
        Error::Domain { what: what.into(), t, s }
    }

    pub(crate) fn precondition(what: impl Into<String>, witness: Option<f64>) -> Self {
        Error::PreconditionViolated { what: what.into(), witness }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
