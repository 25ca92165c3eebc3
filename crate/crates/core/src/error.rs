use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("ill-conditioned system (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(&'static str),

    #[error("solution blew up at t = {time:e} (sup norm {sup:e}, bound {bound:e})")]
    BlowUp { time: f64, sup: f64, bound: f64 },

    #[error("kernel does not vanish on the edge y = 1 (max |L(x,1)| = {violation:e})")]
    BoundaryCondition { violation: f64 },

    #[error("end conditions violated (max residual {residual:e})")]
    EndConditions { residual: f64 },

    #[error("malformed kernel file: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for failures of the numerics (blow-up, conditioning) rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. } | Error::IllConditioned { .. } | Error::NoConvergence(_) | Error::BlowUp { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
