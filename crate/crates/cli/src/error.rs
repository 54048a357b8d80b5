use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based; 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", join(.0))]
    Parse(Vec<ParseError>),
    #[error("building the model: {0}")]
    Build(String),
    #[error("invalid model:\n{}", join(.0))]
    Invalid(Vec<String>),
    #[error("unknown export format '{0}' (expected json, dot or text)")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Validation-class failures all map to exit status 2.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
