use std::fmt;

use sldkit_core::Error;

/// Failure classes with stable exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments, unreadable or invalid model files, invalid states.
    Input,
    /// A solver refused or failed on a valid input.
    Solver,
    /// Routes that should agree did not.
    CrossValidation,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Input => 1,
            ErrorKind::Solver => 2,
            ErrorKind::CrossValidation => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Input,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Solver,
            message: message.into(),
        }
    }

    pub fn cross_validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::CrossValidation,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Short variant name, used as a tag in messages and skipped-route notes.
pub fn error_name(e: &Error) -> &'static str {
    match e {
        Error::NotSquare { .. } => "NotSquare",
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::NonFinite => "NonFinite",
        Error::NotHermitian { .. } => "NotHermitian",
        Error::NotPositive { .. } => "NotPositive",
        Error::TraceNotOne { .. } => "TraceNotOne",
        Error::EigenFailure { .. } => "EigenFailure",
        Error::EmptySupport => "EmptySupport",
        Error::OverflowRisk { .. } => "OverflowRisk",
        Error::Singular => "Singular",
        Error::Syntax { .. } => "SyntaxError",
        Error::UnknownIdentifier { .. } => "UnknownIdentifier",
        Error::UnknownParameter { .. } => "UnknownParameter",
        Error::MissingParameter { .. } => "MissingParameter",
        Error::InvalidModel(_) => "InvalidModel",
        Error::InvalidState(_) => "InvalidState",
        Error::EvalError(_) => "EvalError",
        Error::DomainEdge { .. } => "DomainEdge",
        Error::RankDrift { .. } => "RankDrift",
        Error::ResidualTooLarge { .. } => "ResidualTooLarge",
        Error::NoConvergence { .. } => "NoConvergence",
        Error::UnstableRegime { .. } => "UnstableRegime",
        Error::NotFullRank { .. } => "NotFullRank",
        Error::NotCommuting { .. } => "NotCommuting",
        Error::ClassViolation { .. } => "ClassViolation",
        Error::InvalidBloch { .. } => "InvalidBloch",
        Error::NotUnitary { .. } => "NotUnitary",
        Error::EtaOutOfRange { .. } => "EtaOutOfRange",
        Error::EtaBoundary { .. } => "EtaBoundary",
        Error::BlockMismatch { .. } => "BlockMismatch",
        Error::PurityBoundary { .. } => "PurityBoundary",
        Error::SingularOutcome { .. } => "SingularOutcome",
        Error::DomainTooNarrow { .. } => "DomainTooNarrow",
        Error::InvalidArgument(_) => "InvalidArgument",
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::NotSquare { .. }
            | Error::DimensionMismatch { .. }
            | Error::NonFinite
            | Error::NotHermitian { .. }
            | Error::NotPositive { .. }
            | Error::TraceNotOne { .. }
            | Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::UnknownParameter { .. }
            | Error::MissingParameter { .. }
            | Error::InvalidModel(_)
            | Error::InvalidState(_)
            | Error::EvalError(_)
            | Error::DomainEdge { .. }
            | Error::InvalidBloch { .. }
            | Error::NotUnitary { .. }
            | Error::EtaOutOfRange { .. }
            | Error::DomainTooNarrow { .. }
            | Error::InvalidArgument(_) => ErrorKind::Input,
            _ => ErrorKind::Solver,
        };
        Self {
            kind,
            message: format!("{}: {e}", error_name(&e)),
        }
    }
}
