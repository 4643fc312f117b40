use std::fmt;
use std::process::ExitCode;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Io,
    Parse,
    Precondition,
    Budget,
    Stuck,
}

impl ErrorClass {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorClass::Io => 1,
            ErrorClass::Parse => 2,
            ErrorClass::Precondition => 3,
            ErrorClass::Budget => 4,
            ErrorClass::Stuck => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliError {
    pub class: ErrorClass,
    /// Module that raised the error, e.g. `traintrack-driver`.
    pub module: String,
    pub message: String,
}

impl CliError {
    pub fn new(class: ErrorClass, module: &str, message: impl fmt::Display) -> Self {
        CliError { class, module: module.to_string(), message: message.to_string() }
    }

    pub fn precondition(module: &str, e: impl fmt::Display) -> Self {
        CliError::new(ErrorClass::Precondition, module, e)
    }

    pub fn parse(path: &str, e: ParseError) -> Self {
        CliError::new(ErrorClass::Parse, "cli", format!("{path}: {e}"))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.class.exit_code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.module, self.message)
    }
}
