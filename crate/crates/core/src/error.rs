use std::path::PathBuf;

use thiserror::Error;

use crate::dfoci::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-ground term in `{0}`")]
    NonGround(String),

    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("invalid domain: {}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),

    #[error("unknown subtask `{0}`")]
    UnknownSubtask(String),

    #[error("bad grounding: {0}")]
    Grounding(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error("state budget of {0} exceeded")]
    StateBudget(usize),

    #[error("no plan found: {0}")]
    NoPlan(String),

    #[error("not a partition: {0}")]
    NotAPartition(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Reads a UTF-8 text file, attaching the path to any error.
pub(crate) fn read_text(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
