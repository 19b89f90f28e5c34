//! Command errors and their exit statuses.

use std::io;
use std::path::PathBuf;

use otuniq::error::{RegularityError, SolveError, UniquenessError};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_NON_UNIQUE: i32 = 10;
pub const EXIT_INCONCLUSIVE: i32 = 11;
pub const EXIT_ORACLE_DISAGREEMENT: i32 = 20;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("a decomposition is needed: pass --epsilon, --labels, or set options.epsilon")]
    MissingEpsilon,
    #[error("source mass {source_total} differs from target mass {target_total}")]
    Unbalanced { source_total: f64, target_total: f64 },
    #[error(transparent)]
    Solve(SolveError),
    #[error(transparent)]
    Uniqueness(UniquenessError),
    #[error(transparent)]
    Regularity(RegularityError),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } | CliError::Invalid(_) | CliError::MissingEpsilon => EXIT_PARSE,
            CliError::Unbalanced { .. } | CliError::Solve(_) => EXIT_SOLVER,
            CliError::Uniqueness(UniquenessError::Solve(_)) | CliError::Regularity(RegularityError::Solve(_)) => EXIT_SOLVER,
            _ => EXIT_FAILURE,
        }
    }

    /// Short machine-readable tag printed with the message.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "read",
            CliError::Write { .. } => "write",
            CliError::Parse { .. } => "parse",
            CliError::Invalid(_) => "invalid_input",
            CliError::MissingEpsilon => "missing_epsilon",
            CliError::Unbalanced { .. } | CliError::Solve(SolveError::Unbalanced { .. }) => "unbalanced",
            CliError::Solve(_) => "solver",
            CliError::Uniqueness(UniquenessError::Solve(_)) | CliError::Regularity(RegularityError::Solve(_)) => "solver",
            CliError::Uniqueness(_) => "uniqueness",
            CliError::Regularity(_) => "regularity",
            CliError::Failed(_) => "failed",
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Unbalanced { source_total, target_total } => CliError::Unbalanced { source_total, target_total },
            other => CliError::Solve(other),
        }
    }
}

impl From<UniquenessError> for CliError {
    fn from(e: UniquenessError) -> Self {
        match e {
            UniquenessError::Solve(s) => s.into(),
            other => CliError::Uniqueness(other),
        }
    }
}

impl From<RegularityError> for CliError {
    fn from(e: RegularityError) -> Self {
        match e {
            RegularityError::Solve(s) => s.into(),
            other => CliError::Regularity(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_errors_are_status_three() {
        let e: CliError = SolveError::Unbalanced { source_total: 1.0, target_total: 0.5 }.into();
        assert_eq!(e.exit_code(), EXIT_SOLVER);
        assert_eq!(e.code(), "unbalanced");
        let e: CliError = UniquenessError::Solve(SolveError::IterationLimit(3)).into();
        assert_eq!(e.exit_code(), EXIT_SOLVER);
    }

    #[test]
    fn input_errors_are_status_two() {
        assert_eq!(CliError::MissingEpsilon.exit_code(), EXIT_PARSE);
        assert_eq!(CliError::Invalid("x".into()).exit_code(), EXIT_PARSE);
        assert_eq!(CliError::Failed("x".into()).exit_code(), EXIT_FAILURE);
    }
}
