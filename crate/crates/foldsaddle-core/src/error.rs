use core::fmt;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A family parameter lies outside its admissible range.
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },
    /// The point is not a quadratic tangency of the requested field.
    NotAFold { x: f64, y: f64 },
    /// A denominator vanished (direction function, α0 at β = 0, ...).
    DegenerateDenominator { what: &'static str },
    /// The return map is undefined at this abscissa.
    OutsideDomain { x: f64 },
    /// A named point (h, i, j, ...) does not exist for these parameters.
    MissingPoint { name: &'static str },
    /// No sign change was found on the search interval.
    NoBracket { lo: f64, hi: f64 },
    /// No parameter value with two canard cycles was found.
    NoWindow { lo: f64, hi: f64 },
    /// Boundary values are not in the expected order.
    OrderingViolation { left: &'static str, right: &'static str },
    /// λ is within tolerance of two different boundaries.
    Ambiguous { first: &'static str, second: &'static str },
    /// Event localization failed to bracket a crossing.
    StepFailure { t: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParameterOutOfRange { name, value, bound } => {
                write!(f, "parameter {name} = {value} violates {bound}")
            }
            Error::NotAFold { x, y } => write!(f, "({x}, {y}) is not a fold point"),
            Error::DegenerateDenominator { what } => write!(f, "degenerate denominator in {what}"),
            Error::OutsideDomain { x } => write!(f, "return map undefined at x = {x}"),
            Error::MissingPoint { name } => write!(f, "point {name} does not exist for these parameters"),
            Error::NoBracket { lo, hi } => write!(f, "no sign change on ({lo}, {hi})"),
            Error::NoWindow { lo, hi } => write!(f, "no two-cycle window for lambda in ({lo}, {hi})"),
            Error::OrderingViolation { left, right } => {
                write!(f, "boundary ordering violated: expected {left} < {right}")
            }
            Error::Ambiguous { first, second } => {
                write!(f, "lambda is within tolerance of both {first} and {second}")
            }
            Error::StepFailure { t } => write!(f, "event localization failed near t = {t}"),
        }
    }
}

impl core::error::Error for Error {}
