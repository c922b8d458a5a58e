use thiserror::Error;

/// Failures raised by the model, simulation and optimisation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the range its type admits.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The inputs are individually valid but the operation is undefined for them.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure (quadrature, bisection, fitting) failed to converge.
    #[error("numeric failure in {routine}: {detail}")]
    Numeric {
        routine: &'static str,
        detail: String,
    },

    /// A modelling assumption required by a closed form does not hold.
    #[error("assumption {name} violated: {detail}")]
    Assumption { name: &'static str, detail: String },

    /// The allocation problem has no feasible point.
    #[error("infeasible allocation problem: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
