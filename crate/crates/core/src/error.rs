use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported cell: {0}")]
    UnsupportedCell(String),
    #[error("degree unsupported: {0}")]
    DegreeUnsupported(String),
    #[error("degenerate node set: {0}")]
    DegenerateNodeSet(String),
    #[error("dependent constraints: rank {rank} < {expected} constraints")]
    DependentConstraints { rank: usize, expected: usize },
    #[error("unsupported derivative order {0}")]
    UnsupportedDerivativeOrder(usize),
    #[error("incompatible value shapes: {0}")]
    IncompatibleShapes(String),
    #[error("index appears once: {0}")]
    IndexAppearsOnce(String),
    #[error("not lowerable: {0}")]
    NotLowerable(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared identifier '{name}' at line {line}, column {column}")]
    Undeclared {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("no form defined")]
    NoFormDefined,
    #[error("degenerate cell (det = {0:e})")]
    DegenerateCell(f64),
    #[error("symmetry assertion failed: {0}")]
    SymmetryAssertion(String),
    #[error("schedule verification failed: max deviation {0:e}")]
    ScheduleVerification(f64),
    #[error("zero-volume cell {0}")]
    ZeroVolumeCell(usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("element/mesh cell-shape mismatch: element on {element}, mesh of {mesh}")]
    CellMismatch { element: String, mesh: String },
    #[error("no schedule in artifact")]
    NoSchedule,
    #[error("missing coefficient: {0}")]
    MissingCoefficient(String),
    #[error("CG did not converge after {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },
    #[error("signature mismatch: stored {stored}, recomputed {computed}")]
    SignatureMismatch { stored: String, computed: String },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
