use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("length mismatch: {left_name} has {left} items, {right_name} has {right}")]
    LengthMismatch {
        left_name: &'static str,
        left: usize,
        right_name: &'static str,
        right: usize,
    },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("loss is not a scalar (shape {rows}x{cols})")]
    NonScalarLoss { rows: usize, cols: usize },

    #[error("non-finite loss {loss} on instance {index}: {dump}")]
    NonFiniteLoss { loss: f64, index: usize, dump: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
