use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: node index {index} out of range for {n} nodes")]
    NodeOutOfRange { line: usize, index: usize, n: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("degree statistics undefined: graph has no edges")]
    EdgelessGraph,

    #[error("invalid degree sequence: {0}")]
    InvalidDegreeSequence(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("walk count for k = {k} exceeds 2^53 and can no longer be represented exactly")]
    CountOverflow { k: usize },

    #[error("brute-force oracle bound exceeded (n = {n}, k = {k}; limits n <= 12, k <= 6)")]
    OracleTooLarge { n: usize, k: usize },

    #[error("node {node} has no incoming walks of length {k}")]
    NoIncomingWalks { node: usize, k: usize },

    #[error("node {node} has degree zero; symmetric normalization is undefined")]
    ZeroDegree { node: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("training mask selects no nodes")]
    EmptyTrainSet,

    #[error("node count mismatch: {0}")]
    NodeCountMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the input data rather than the program or
    /// the environment. Missing or undecodable input files count as data.
    pub fn is_data_error(&self) -> bool {
        use std::io::ErrorKind;
        match self {
            Error::Io { source, .. } => {
                matches!(source.kind(), ErrorKind::NotFound | ErrorKind::InvalidData)
            }
            Error::Csv { source, .. } => match source.kind() {
                csv::ErrorKind::Io(e) => {
                    matches!(e.kind(), ErrorKind::NotFound | ErrorKind::InvalidData)
                }
                _ => true,
            },
            _ => true,
        }
    }
}
