use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A chart (coordinate system) is not valid at the requested point.
    #[error("chart error: {0}")]
    Chart(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// The bodies came within the collision guard distance.
    #[error("near-collision: angular distance {phi:e} {}", when(*t))]
    NearCollision { phi: f64, t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },

    #[error("non-finite derivative at t = {t}")]
    NonFinite { t: f64, state: Vec<f64> },

    /// The request is well-formed but has no solution in the supported regime.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn chart(msg: impl Into<String>) -> Self {
        Error::Chart(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}

fn when(t: f64) -> String {
    if t.is_nan() {
        "in the initial state".to_string()
    } else {
        format!("at t = {t}")
    }
}
