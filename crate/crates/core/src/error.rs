use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input or a violated precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// Argument outside the support of the model.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter cap exceeded: {0}")]
    ParameterCap(String),

    #[error("quadrature did not converge at {nodes} nodes (last estimate {last}, previous {previous})")]
    NoConvergence { nodes: usize, last: f64, previous: f64 },

    #[error("draw budget of {budget} exhausted after {found} of {wanted} records")]
    BudgetExhausted { budget: u64, found: usize, wanted: usize },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of a numerical method rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::BudgetExhausted { .. })
    }
}
