use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building, assembling or solving a problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("subdivision count {n} does not resolve breakpoint {breakpoint} (need {breakpoint}*n to be an integer)")]
    IncompatibleSubdivision { n: usize, breakpoint: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate cell: determinant {det:e} is not positive")]
    DegenerateCell { det: f64 },

    #[error("unsupported polynomial degree {degree} (supported: {min}..={max})")]
    UnsupportedDegree { degree: usize, min: usize, max: usize },

    #[error("quadrature degree {0} exceeds the supported maximum of 20")]
    QuadratureDegree(usize),

    #[error("conflicting boundary conditions for field {field} on facet {facet}")]
    ConflictingBoundaryConditions { facet: usize, field: &'static str },

    #[error("index ({row}, {col}) out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("relative residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("local block of cell {cell} could not be factorized")]
    SingularCellBlock { cell: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
