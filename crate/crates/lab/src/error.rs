use std::fmt;
use std::io;
use std::path::PathBuf;

#[derive(Debug)]
pub enum LabError {
    Usage(String),
    Config { path: PathBuf, line: usize, message: String },
    Core(thetalab_core::Error),
    Io { path: PathBuf, source: io::Error },
    Csv(csv::Error),
    Json(serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn usage(msg: impl Into<String>) -> Self {
        LabError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Usage(msg) => write!(f, "{msg}"),
            LabError::Config { path, line, message } => write!(f, "{}:{line}: {message}", path.display()),
            LabError::Core(e) => write!(f, "{e}"),
            LabError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            LabError::Csv(e) => write!(f, "csv: {e}"),
            LabError::Json(e) => write!(f, "json: {e}"),
        }
    }
}

impl std::error::Error for LabError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            LabError::Core(e) => Some(e),
            LabError::Io { source, .. } => Some(source),
            LabError::Csv(e) => Some(e),
            LabError::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<thetalab_core::Error> for LabError {
    fn from(e: thetalab_core::Error) -> Self {
        LabError::Core(e)
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Csv(e)
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Json(e)
    }
}
