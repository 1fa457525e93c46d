//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by construction, geometry, and solver operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no data")]
    NoData,
    #[error("no data for group `{0}`")]
    NoDataForGroup(String),
    #[error("invalid score {value}: must lie in [0, 1]")]
    InvalidScore { value: f64 },
    #[error("negative weight {value}")]
    NegativeWeight { value: f64 },
    #[error("non-positive mass {value}")]
    NonPositiveMass { value: f64 },
    #[error("invalid prior {value}: must lie in (0, 1]")]
    InvalidPrior { value: f64 },
    #[error("priors sum to {sum}, expected 1")]
    PriorSum { sum: f64 },
    #[error("decision length {decision} does not match atom count {atoms}")]
    LengthMismatch { decision: usize, atoms: usize },
    #[error("lambda {value} outside [0, 1]")]
    InvalidLambda { value: f64 },
    #[error("infeasible point ({tnr}, {tpr})")]
    InfeasiblePoint { tnr: f64, tpr: f64 },
    #[error("not a frontier: {reason}")]
    NotAFrontier { reason: String },
    #[error("degenerate base rate")]
    DegenerateBaseRate,
    #[error("degenerate group `{0}`: fewer than two distinct scores")]
    DegenerateGroup(String),
    #[error("degenerate group: {0}")]
    DegenerateRate(&'static str),
    #[error("expected exactly 2 groups, found {0}")]
    GroupCount(usize),
    #[error("grid pitch {0} outside (0, 0.1]")]
    InvalidGridPitch(f64),
    #[error("empty feasible grid")]
    EmptyGrid,
    #[error("oracle scale: {0}")]
    OracleScale(String),
    #[error("empty optima set")]
    EmptyOptima,
    #[error("matrix size mismatch: {a}x{a} vs {b}x{b}")]
    SizeMismatch { a: usize, b: usize },
    #[error("invalid confusion matrix: {0}")]
    InvalidMatrix(String),
    #[error("inconsistent limit-ratio matrix: {0}")]
    InconsistentRatios(String),
    #[error("weights must be strictly positive and sum to 1")]
    InvalidWeights,
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    /// Downstream tooling matches on these stable message prefixes.
    #[test]
    fn message_prefixes_are_stable() {
        let cases: Vec<(Error, &str)> = vec![
            (Error::NoData, "no data"),
            (Error::InvalidScore { value: 1.5 }, "invalid score"),
            (Error::NegativeWeight { value: -1.0 }, "negative weight"),
            (
                Error::InfeasiblePoint { tnr: 0.9, tpr: 0.9 },
                "infeasible point",
            ),
            (
                Error::NotAFrontier {
                    reason: "x".into(),
                },
                "not a frontier",
            ),
            (Error::DegenerateBaseRate, "degenerate base rate"),
            (Error::DegenerateGroup("g".into()), "degenerate group"),
            (Error::DegenerateRate("p"), "degenerate group"),
            (Error::OracleScale("big".into()), "oracle scale"),
        ];
        for (error, prefix) in cases {
            assert!(
                error.to_string().starts_with(prefix),
                "{error} missing prefix {prefix}"
            );
        }
    }
}
