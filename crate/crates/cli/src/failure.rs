//! Errors carrying the process exit code.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage = 1,
    Data = 2,
    Numeric = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { kind: Kind::Usage, error: error.into() }
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Self { kind: Kind::Data, error: error.into() }
    }

    pub fn code(&self) -> u8 {
        self.kind as u8
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<hcsdr::Error> for Failure {
    fn from(e: hcsdr::Error) -> Self {
        use hcsdr::Error::*;
        let kind = match &e {
            InvalidConfig(_) | UnknownModel(_) => Kind::Usage,
            NonFinite { .. }
            | TooFewRows { .. }
            | TooFewCols(_)
            | ShapeMismatch(_)
            | LengthMismatch { .. }
            | DimensionMismatch { .. } => Kind::Data,
            DomainError { .. } | DegenerateDirection(_) | SingularCovariance { .. } | EmptySlice { .. } => {
                Kind::Numeric
            }
        };
        Self { kind, error: e.into() }
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// Attaches a kind to any error convertible to `anyhow::Error`.
pub trait OrFail<T> {
    fn or_usage(self) -> Outcome<T>;
    fn or_data(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> OrFail<T> for Result<T, E> {
    fn or_usage(self) -> Outcome<T> {
        self.map_err(Failure::usage)
    }

    fn or_data(self) -> Outcome<T> {
        self.map_err(Failure::data)
    }
}
