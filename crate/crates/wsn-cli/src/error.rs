use std::path::Path;

/// Anything a command can fail with, mapped onto the process exit codes:
/// 1 for filesystem trouble, 2 for scenario or flag problems, 3 when a
/// solver gives up.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("{0}")]
    Config(String),
    #[error("solver failed: {0}")]
    Solver(#[from] wsn_lifetime::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Write { .. } => 1,
            CliError::Parse(_) | CliError::Validation(_) | CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    pub fn read(path: &Path, source: std::io::Error) -> Self {
        CliError::Read {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn write(path: &Path, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.display().to_string(),
            source,
        }
    }
}
