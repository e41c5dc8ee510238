use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0} required")]
    Missing(&'static str),
    #[error(transparent)]
    Core(#[from] shapdag::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub(crate) fn parse(e: &serde_json::Error) -> Self {
        let full = e.to_string();
        // serde_json appends " at line L column C"; the position is kept separately.
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        CliError::Parse { line: e.line(), column: e.column(), message }
    }

    pub(crate) fn io(path: &str, e: std::io::Error) -> Self {
        CliError::Io { path: path.to_string(), message: e.to_string() }
    }
}
