use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not normal (residual {residual:.3e})")]
    NotNormal { residual: f64 },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("photon number mismatch: {input} in, {output} out")]
    PhotonMismatch { input: usize, output: usize },
    #[error("photon count {0} exceeds the supported maximum of {max}", max = crate::fock::MAX_PHOTONS)]
    TooManyPhotons(usize),
    #[error("output photon number would be negative")]
    NegativePhotons,
    #[error("mode count must be at least {min}, got {found}")]
    TooFewModes { min: usize, found: usize },
    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("permanent of size {size} exceeds the cap of {max}")]
    PermanentTooLarge { size: usize, max: usize },
    #[error("sector dimension {dimension} exceeds the oracle limit of {max}")]
    OracleTooLarge { dimension: usize, max: usize },
    #[error("parameter `{0}` is used more than once")]
    DuplicateParameter(String),
    #[error("parameter `{0}` is not bound to a value")]
    UnboundParameter(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("expected {expected} parameter values, got {found}")]
    ParameterCount { expected: usize, found: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs' shape.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotNormal { .. }
                | Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::NotPsd { .. }
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
