use std::fmt;

/// Errors raised by path, integral, solver and flow operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A window or time lies outside the domain of a path.
    Domain(String),
    /// A numeric parameter is out of its admissible range.
    Parameter(String),
    /// An input is too large for an exhaustive computation.
    Size(String),
    /// Two paths cannot be joined end to start.
    Join(String),
    /// Dimensions of integrand and driver do not match.
    Shape(String),
    /// The declared regularities do not define a Young integral.
    Regularity(String),
    /// A path contains non-finite values or is otherwise malformed.
    Data(String),
    /// A greedy sequence was asked to continue from the end of its domain.
    Exhausted(f64),
    /// No admissible exponents exist; the message names the violated inequality.
    Infeasible(String),
    /// A stated precondition of an operation does not hold.
    Precondition(String),
    /// Picard iteration failed even after repeated interval shrinking.
    Solver { lo: f64, hi: f64, reason: String },
    /// Covariance factorization failed.
    Factorization(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Parameter(m) => write!(f, "parameter error: {m}"),
            Error::Size(m) => write!(f, "size error: {m}"),
            Error::Join(m) => write!(f, "join error: {m}"),
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::Regularity(m) => write!(f, "regularity error: {m}"),
            Error::Data(m) => write!(f, "data error: {m}"),
            Error::Exhausted(t) => write!(f, "no greedy time after t = {t}: domain exhausted"),
            Error::Infeasible(m) => write!(f, "infeasible exponents: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Solver { lo, hi, reason } => {
                write!(f, "solver failed on [{lo}, {hi}]: {reason}")
            }
            Error::Factorization(m) => write!(f, "factorization error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
