use ccpp::pipeline::{Stage, StageError};
use ccpp::Error;

pub const VALIDATION: u8 = 2;
pub const INFEASIBLE: u8 = 3;
pub const VIOLATIONS: u8 = 4;
pub const IO: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

pub fn code_of(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => IO,
        Error::Parse { .. }
        | Error::EmptyInput(_)
        | Error::Config(_)
        | Error::Model(_)
        | Error::NoSlices { .. }
        | Error::Invalid(_) => VALIDATION,
        Error::LoopCountMismatch { .. }
        | Error::TooManyClusters { .. }
        | Error::DegenerateLoop(_)
        | Error::NotEnoughAgents { .. }
        | Error::SchedulingInfeasible { .. }
        | Error::TransferInfeasible { .. } => INFEASIBLE,
    }
}

impl From<StageError> for CliError {
    fn from(e: StageError) -> Self {
        CliError::new(code_of(&e.source), e.to_string())
    }
}

/// Tags a library error with the stage it came from.
pub fn at<T>(r: ccpp::Result<T>, stage: Stage) -> Result<T, CliError> {
    r.map_err(|source| StageError { stage, source }.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn codes_by_kind() {
        assert_eq!(code_of(&Error::Config("x".into())), VALIDATION);
        assert_eq!(code_of(&Error::DegenerateLoop(2)), INFEASIBLE);
        let io = Error::Io {
            path: PathBuf::from("a"),
            source: std::io::Error::other("boom"),
        };
        assert_eq!(code_of(&io), IO);
    }

    #[test]
    fn stage_prefix() {
        let e: CliError = StageError {
            stage: Stage::Config,
            source: Error::Config("omega must be < r_max".into()),
        }
        .into();
        assert!(e.message.starts_with("config: "));
        assert_eq!(e.code, VALIDATION);
    }
}
