use thiserror::Error;

/// Errors raised across evaluation, estimation, compound-risk and regression code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("value outside the supported domain: {0}")]
    Domain(String),

    #[error("sample moments are incompatible with a PTE law: {0}")]
    InfeasibleMoments(String),

    #[error("zero proportion and mean are incompatible with a PTE law: {0}")]
    InfeasibleStatistics(String),

    #[error("observed information is not positive definite")]
    SingularInformation,

    #[error("expected count is zero in cell {0}")]
    EmptyCell(String),

    #[error("invalid severity: {0}")]
    InvalidSeverity(String),

    #[error("recursion table of {requested} cells exceeds the budget of {budget}")]
    TruncationBudgetExceeded { requested: usize, budget: usize },

    #[error("design matrix is rank deficient (rank {rank} < {columns} columns)")]
    RankDeficientDesign { rank: usize, columns: usize },

    #[error("optimizer did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
