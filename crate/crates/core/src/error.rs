use thiserror::Error;

pub type Result<T> = std::result::Result<T, EbrError>;

#[derive(Debug, Error)]
pub enum EbrError {
    /// Input with zero variance or otherwise unusable for standardization.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Painlevé II integration could not continue past `abscissa`.
    #[error("Painlevé II integration failed at s = {abscissa}: {reason}")]
    Integration { abscissa: f64, reason: String },

    #[error("parse error at line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: u64,
        column: Option<usize>,
        message: String,
    },

    #[error("cell {cell}, replication {replication}: {source}")]
    Replication {
        cell: String,
        replication: u64,
        #[source]
        source: Box<EbrError>,
    },

    #[error("table cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
