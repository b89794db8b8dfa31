use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error(
        "quadrature did not converge within {subdivisions} subdivisions \
         (error estimate {error_estimate:e}, target {target:e})"
    )]
    NonConvergence {
        subdivisions: usize,
        error_estimate: f64,
        target: f64,
    },

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("realization has no base stations")]
    EmptyBs,

    #[error("realization has no active base station")]
    NoActiveBs,

    #[error("no usable realization after {attempts} attempts")]
    TooManyDiscards { attempts: u64 },

    #[error(
        "minimizer not bracketed: cost still decreasing at {upper:e} after {expansions} expansions"
    )]
    BracketFailure { upper: f64, expansions: u32 },

    #[error("cost is not unimodal on [{low:e}, {high:e}]")]
    NonUnimodal { low: f64, high: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Bad input as opposed to a numerical or sampling failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::DivergentIntegral(_)
                | Error::ZeroDenominator(_)
        )
    }
}

pub(crate) fn require(cond: bool, name: &'static str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(name, reason))
    }
}
