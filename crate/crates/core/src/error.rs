use thiserror::Error;

/// Errors raised by the solvers, diagnostics and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("grids of the operands differ")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("density {value} outside admissible range [{lower}, {upper}]")]
    DensityOutOfBounds { value: f64, lower: f64, upper: f64 },

    #[error("coefficient {value} outside admissible range [{lower}, {upper}]")]
    CoefficientOutOfBounds { value: f64, lower: f64, upper: f64 },

    #[error("field is not divergence-free (max |div| = {0:e})")]
    NotDivergenceFree(f64),

    #[error("time step {dt:e} violates the stability limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("conjugate gradients did not converge after {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("boundary data violates the zero-flux condition: flux = {0:e}")]
    NonzeroFlux(f64),

    #[error("Picard iteration did not converge in {iterations} iterations (last update norm {last_update:e})")]
    PicardNotConverged { iterations: usize, last_update: f64 },

    #[error("Newton iteration did not converge in {iterations} iterations (last residual {residual:e})")]
    NewtonNotConverged { iterations: usize, residual: f64 },

    #[error("singular linear system (zero pivot in column {0})")]
    SingularMatrix(usize),

    #[error("test function does not vanish with its normal derivative on the boundary (max trace {0:e})")]
    TestFunctionSupport(f64),

    #[error("field dump: {0}")]
    Dump(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
