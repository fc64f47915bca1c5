use thiserror::Error;

use crate::solver::SolveResult;

/// Which regularity condition a difference operator violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityCondition {
    /// Offsets do not span the whole space.
    Span,
    /// Modulus weights sum to more than one.
    WeightSum,
    /// Modulus-weighted mean offset is not zero.
    ZeroMean,
    /// A weight is zero, or offsets and weights are inconsistent.
    Malformed,
}

impl std::fmt::Display for RegularityCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegularityCondition::Span => "offsets must span the space",
            RegularityCondition::WeightSum => "sum of weight moduli must not exceed 1",
            RegularityCondition::ZeroMean => "weighted mean offset must vanish",
            RegularityCondition::Malformed => "malformed operator",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Param(String),
    #[error("solver did not reach the requested gap (gap {:.3e} after {} iterations)", .0.gap, .0.iterations)]
    NotConverged(Box<SolveResult>),
    #[error("iteration did not converge: {0}")]
    Convergence(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("operator is not regular: violates {0}")]
    Regularity(RegularityCondition),
    #[error("trial with seed {seed} failed: {source}")]
    Trial { seed: u64, source: Box<Error> },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Param(msg.into()))
}
