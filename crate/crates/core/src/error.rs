use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("boundary maps do not compose to zero (k = {k}, row {row}, col {col}, value {value}); pass force to compute anyway")]
    NotAChainComplex {
        k: usize,
        row: usize,
        col: usize,
        value: i128,
    },
    #[error("no such entry `{0}`")]
    NoSuchEntry(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("chart escape: {0}")]
    ChartEscape(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("f increased by {increase:e} in one step at t = {t}")]
    Monotonicity { t: f64, increase: f64 },
    #[error("refused to count {from} -> {to}: {reason}")]
    Refused {
        from: String,
        to: String,
        reason: String,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        match err.classify() {
            serde_json::error::Category::Io => Error::Malformed(err.to_string()),
            _ => Error::Syntax {
                line: err.line(),
                column: err.column(),
                message: strip_position(&err.to_string()),
            },
        }
    }

    /// Numerical refusals (quorum failures, overflow) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_)
                | Error::Refused { .. }
                | Error::StepUnderflow { .. }
                | Error::Monotonicity { .. }
                | Error::ChartEscape(_)
        )
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(idx) => msg[..idx].to_string(),
        None => msg.to_string(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
