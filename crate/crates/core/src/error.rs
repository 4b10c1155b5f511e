use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input precision too low: need {required} bits, have {available}")]
    InsufficientInputPrecision { required: i64, available: i64 },
    #[error("divisor leading coefficient is below 2^-{bound}")]
    DegenerateDivisor { bound: i64 },
    #[error("divisor is not monic")]
    NotMonic,
    #[error("precision escalation exhausted after {attempts} attempts")]
    PrecisionExhausted { attempts: u32 },
    #[error("points {first} and {second} are coincident or too close to separate")]
    CoincidentPoints { first: usize, second: usize },
    #[error("sign of the polynomial is undecidable in interval {interval}")]
    EvaluationUndecidable { interval: usize },
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short variant name, used by the command line front end.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InsufficientInputPrecision { .. } => "InsufficientInputPrecision",
            Error::DegenerateDivisor { .. } => "DegenerateDivisor",
            Error::NotMonic => "NotMonic",
            Error::PrecisionExhausted { .. } => "PrecisionExhausted",
            Error::CoincidentPoints { .. } => "CoincidentPoints",
            Error::EvaluationUndecidable { .. } => "EvaluationUndecidable",
            Error::ZeroDivisor => "ZeroDivisor",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Number of precision doublings allowed before giving up.
///
/// Defaults to 6; `POLYEVAL_ESCALATION_CAP` overrides it.
pub fn escalation_cap() -> u32 {
    std::env::var("POLYEVAL_ESCALATION_CAP").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(6)
}
