use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Caller supplied an invalid argument (bad factor, out-of-range coordinate, ...).
    Argument(String),
    /// Two arrays that must agree in shape do not.
    Shape {
        what: &'static str,
        expected: String,
        found: String,
    },
    /// Input data violates a domain invariant (non-finite values, bad extents).
    Data(String),
    /// Training produced a non-finite loss.
    NonFinite { iteration: u64, lr: f64, seed: u64 },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn shape(what: &'static str, expected: impl fmt::Debug, found: impl fmt::Debug) -> Self {
        Error::Shape {
            what,
            expected: alloc::format!("{expected:?}"),
            found: alloc::format!("{found:?}"),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Shape { what, expected, found } => {
                write!(f, "shape mismatch for {what}: expected {expected}, found {found}")
            }
            Error::Data(msg) => write!(f, "invalid data: {msg}"),
            Error::NonFinite { iteration, lr, seed } => write!(
                f,
                "non-finite training loss at iteration {iteration} (lr = {lr:e}, seed = {seed})"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
