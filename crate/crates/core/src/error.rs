use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is not prime")]
    NotPrime(u32),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("site index {site} out of range for {n} sites")]
    Site { site: usize, n: usize },

    #[error("dense size guard exceeded: {dim} amplitudes (limit {limit})")]
    SizeGuard { dim: usize, limit: usize },

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("singular tableau: rows do not span the Pauli group")]
    SingularTableau,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("catalog invariant violated: {0}")]
    Catalog(String),

    #[error("norm drift {0:.3e} after operator application")]
    NormDrift(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
