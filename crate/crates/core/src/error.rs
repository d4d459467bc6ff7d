use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{p} is not an admissible prime: {reason}")]
    InvalidPrime { p: u64, reason: &'static str },
    #[error("prime {p} divides the activation degree {r}")]
    BadPrime { p: u64, r: u32 },
    #[error("operands live over different fields")]
    FieldMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("monomial basis too large: {0}")]
    DegreeOverflow(String),
    #[error("diagonal scaling entry at layer {layer}, index {index} is not invertible")]
    NonInvertibleDiagonal { layer: usize, index: usize },
    #[error("sample points are degenerate: evaluation matrix has rank {rank} < {needed}")]
    DegenerateSamples { rank: usize, needed: usize },
    #[error("interpolation failed after {attempts} attempts")]
    InterpolationFailed { attempts: usize },
    #[error("search budget of {budget} oracle calls exhausted")]
    BudgetExceeded { budget: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
