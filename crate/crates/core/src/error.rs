use std::fmt;

/// Crate-wide error type. Variants name the precondition or failure they report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// gcd(a, m) > 1, so a has no inverse mod m.
    NotInvertible { a: i64, modulus: u64 },
    /// A modulus exceeded the documented cap for the operation.
    ModulusTooLarge { modulus: u64, cap: u64 },
    /// A character was evaluated against a sum with a different modulus.
    ModulusMismatch { chi_modulus: u64, modulus: u64 },
    /// gcd(c, q) > 1 where coprimality was required.
    NotCoprime { c: u64, q: u64 },
    /// Argument coprimality or similarity constraints violated.
    ConstraintViolation(String),
    /// A proved bound was exceeded during a scan; indicates an implementation bug.
    BoundViolation(String),
    /// Integer table construction would overflow 128-bit intermediates.
    OverflowRisk { n: u64 },
    /// A coefficient table is too short for the requested range.
    TableTooSmall { needed: u64, limit: u64 },
    /// An iterative or adaptive computation failed to meet its tolerance.
    NotConverged(String),
    /// Power iteration failed to stabilize.
    IterationDiverged(String),
    /// A probe violated the hypotheses of the statement it was built to test.
    HypothesisViolated(String),
    /// No stationary point inside the support, where one was required.
    NoStationaryPoint { t0: f64, lo: f64, hi: f64 },
    /// Not enough usable data for a least-squares fit.
    DegenerateFit(String),
    /// Invalid run configuration.
    ConfigInvalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotInvertible { a, modulus } => {
                write!(f, "{a} is not invertible mod {modulus}")
            }
            Error::ModulusTooLarge { modulus, cap } => {
                write!(f, "modulus {modulus} exceeds cap {cap}")
            }
            Error::ModulusMismatch { chi_modulus, modulus } => {
                write!(f, "character modulus {chi_modulus} does not match sum modulus {modulus}")
            }
            Error::NotCoprime { c, q } => write!(f, "{c} and {q} are not coprime"),
            Error::ConstraintViolation(s) => write!(f, "constraint violation: {s}"),
            Error::BoundViolation(s) => write!(f, "bound violation: {s}"),
            Error::OverflowRisk { n } => write!(f, "128-bit overflow risk near index {n}"),
            Error::TableTooSmall { needed, limit } => {
                write!(f, "table limit {limit} is below required index {needed}")
            }
            Error::NotConverged(s) => write!(f, "did not converge: {s}"),
            Error::IterationDiverged(s) => write!(f, "iteration diverged: {s}"),
            Error::HypothesisViolated(s) => write!(f, "hypothesis violated: {s}"),
            Error::NoStationaryPoint { t0, lo, hi } => {
                write!(f, "stationary point {t0} outside support [{lo}, {hi}]")
            }
            Error::DegenerateFit(s) => write!(f, "degenerate fit: {s}"),
            Error::ConfigInvalid(s) => write!(f, "invalid config: {s}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
