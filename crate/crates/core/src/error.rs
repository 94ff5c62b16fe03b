use std::fmt;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// A vector or matrix had the wrong length/shape for the operation.
    DimMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A matrix that must be positive definite was not (singular solve).
    SingularMatrix,
    /// QUBO instance with all-zero couplings: c0 is undefined.
    DegenerateInstance,
    /// A spin vector argument contained entries other than +1/-1.
    NonBinarySpin,
    /// Invalid configuration value.
    InvalidConfig(String),
    /// Training aborted on a non-finite loss.
    NonFiniteLoss {
        update: usize,
        loss: f64,
    },
    /// Parameter file failed validation (version, field, or shape).
    ParamsFile(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimMismatch {
                what,
                expected,
                got,
            } => write!(
                f,
                "dimension mismatch for {what}: expected {expected}, got {got}"
            ),
            Error::SingularMatrix => write!(f, "matrix is singular or not positive definite"),
            Error::DegenerateInstance => {
                write!(
                    f,
                    "degenerate instance: all couplings are zero, c0 undefined"
                )
            }
            Error::NonBinarySpin => write!(f, "spin vector has entries outside {{+1,-1}}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NonFiniteLoss { update, loss } => {
                write!(f, "non-finite loss {loss} at update {update}")
            }
            Error::ParamsFile(msg) => write!(f, "parameter file: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimMismatch {
            what,
            expected,
            got,
        })
    }
}
