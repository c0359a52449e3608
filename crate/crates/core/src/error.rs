use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("not testable: {0}")]
    NotTestable(String),

    #[error("hard constraints are unsatisfiable; conflicting facts: {}", .conflict.join("; "))]
    Infeasible { conflict: Vec<String> },

    #[error("contradiction: {0}")]
    Contradiction(String),

    #[error("refinement failed: {0}")]
    Refinement(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
