use thiserror::Error;

/// Errors raised by the series, normal-form, basin and orbit machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series shape mismatch: {0}")]
    Shape(String),

    #[error("replacement for variable {index} has a nonzero constant term")]
    NonzeroConstant { index: usize },

    #[error("invalid germ: {0}")]
    InvalidGerm(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("degree {degree} out of range 1..={order_cap}")]
    DegreeOutOfRange { degree: u32, order_cap: u32 },

    #[error("resonance enumeration needs {candidates} candidates, above the cap of {cap}")]
    EnumerationCap { candidates: u128, cap: u128 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("truncation-limited: {0}")]
    TruncationLimited(String),

    #[error("blow-up budget of {max} exhausted; offending monomials: {offending}")]
    BlowupsExhausted { max: u32, offending: String },

    #[error("invariant changed under blow-up: {0}")]
    InvariantBroken(String),

    #[error("basin parameters: {0}")]
    Params(String),

    #[error("calibration reached the epsilon floor: {0}")]
    CalibrationFloor(String),

    #[error("rejection sampler gave up after {attempts} attempts ({accepted} accepted)")]
    Rejection { attempts: usize, accepted: usize },

    #[error("orbit: {0}")]
    Orbit(String),

    #[error("germ file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
