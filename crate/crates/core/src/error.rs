use thiserror::Error;

pub type Result<T> = std::result::Result<T, LakeError>;

#[derive(Debug, Error)]
pub enum LakeError {
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("resolution {resolution} too coarse: {reason}")]
    ResolutionTooCoarse { resolution: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("depth must be positive, found {value} at ({x}, {y})")]
    NonPositiveDepth { value: f64, x: f64, y: f64 },

    #[error("linear solver did not converge: {iterations} iterations, relative residual {residual:e}")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("incompatible flux data: residual {residual:e} exceeds tolerance {tolerance:e}")]
    Incompatible { residual: f64, tolerance: f64 },

    #[error("CFL number {cfl} exceeds limit {limit}")]
    CflViolation { cfl: f64, limit: f64 },

    #[error("fixed point did not converge at t = {t}: residuals {residuals:?}")]
    FixedPoint { t: f64, residuals: Vec<f64> },

    #[error("grid has {cells} cells, above the dense kernel cap of {cap}")]
    GridTooLarge { cells: usize, cap: usize },

    #[error("sigma {sigma} not admissible: {reason}")]
    Sigma { sigma: f64, reason: String },

    #[error("config error at line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
