//! Error type shared across the harness, with CLI exit-code mapping.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("request error: HTTP {status}: {message}")]
    Http { status: u16, message: String },

    #[error("retry budget exhausted after {attempts} attempts: {message}")]
    RetryExhausted { attempts: u32, message: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("incomplete run: {} pending cells: {}", .0.len(), summarize_cells(.0))]
    IncompleteRun(Vec<String>),
}

fn summarize_cells(cells: &[String]) -> String {
    const SHOWN: usize = 8;
    if cells.len() <= SHOWN {
        cells.join(", ")
    } else {
        format!("{}, ... ({} more)", cells[..SHOWN].join(", "), cells.len() - SHOWN)
    }
}

impl Error {
    /// Exit code contract: 0 ok, 2 config, 3 I/O, 4 endpoint, 5 incomplete run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Io(_) | Error::Parse { .. } | Error::Validation(_) => 3,
            Error::Http { .. } | Error::RetryExhausted { .. } | Error::Protocol(_) => 4,
            Error::IncompleteRun(_) => 5,
            Error::Domain(_) => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_contract() {
        assert_eq!(Error::Config("x".into()).exit_code(), 2);
        assert_eq!(Error::Usage("x".into()).exit_code(), 2);
        assert_eq!(Error::Validation("x".into()).exit_code(), 3);
        assert_eq!(
            Error::Http { status: 500, message: "x".into() }.exit_code(),
            4
        );
        assert_eq!(Error::IncompleteRun(vec!["p1".into()]).exit_code(), 5);
    }

    #[test]
    fn incomplete_run_message_truncates() {
        let cells: Vec<String> = (0..20).map(|i| format!("p{i}")).collect();
        let msg = Error::IncompleteRun(cells).to_string();
        assert!(msg.contains("20 pending"));
        assert!(msg.contains("12 more"));
    }
}
