use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field `{name}` [{lo}, {hi}] is out of bounds for a {width}-bit row")]
    FieldOutOfBounds {
        name: String,
        lo: usize,
        hi: usize,
        width: usize,
    },
    #[error("row {row} is out of bounds for an array of {rows} rows")]
    RowOutOfBounds { row: usize, rows: usize },
    #[error("key has {got} bits but the selected fields span {expected}")]
    KeyWidth { expected: usize, got: usize },
    #[error("value {value} does not fit in a {width}-bit field")]
    ValueTooWide { value: u128, width: usize },
    #[error("read issued with no tagged row")]
    EmptySelection,
    #[error("write assigns both 0 and 1 to column {0}")]
    ConflictingWrite(usize),
    #[error("truth table hazard: {0}")]
    Hazard(String),
    #[error("invalid truth table: {0}")]
    InvalidTable(String),
    #[error("layout error: {0}")]
    Layout(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("invalid model input: {0}")]
    Model(String),
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn layout(msg: impl Into<String>) -> Self {
        Error::Layout(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
