use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulation frequency must be positive, got {0} Hz")]
    NonPositiveModulation(f64),

    #[error("truncation order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error(
        "harmonic {harmonic} of the grid at {base:.6e} Hz falls at {frequency:.6e} Hz; \
         lower the truncation order to at most {max_order} or use a two-sided grid"
    )]
    NonPositiveFrequency {
        base: f64,
        harmonic: i64,
        frequency: f64,
        max_order: i64,
    },

    #[error(
        "harmonic {harmonic} of the grid at {base:.6e} Hz lands on DC; shift the probe frequency"
    )]
    ZeroFrequencyHarmonic { base: f64, harmonic: i64 },

    #[error("duty cycle must lie strictly between 0 and 1, got {0}")]
    InvalidDuty(f64),

    #[error("clock delay {delay:e} s outside [0, {period:e}) s")]
    InvalidDelay { delay: f64, period: f64 },

    #[error("waveform spectrum lacks the coefficient of harmonic {0}")]
    MissingCoefficient(i64),

    #[error("waveform coefficients violate conjugate symmetry at harmonic {0}")]
    NotConjugateSymmetric(i64),

    #[error("grids or reference impedances of the operands differ")]
    GridMismatch,

    #[error("expected a {expected} matrix")]
    WrongKind { expected: &'static str },

    #[error("matrix dimensions do not agree: {0}")]
    DimensionMismatch(String),

    #[error("conversion matrix is numerically singular (condition estimate {condition:.3e})")]
    SingularConversion { condition: f64 },

    #[error("interconnect matrix is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditionedInterconnect { condition: f64 },

    #[error("invalid connection map: {0}")]
    InvalidMatching(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("capacitance waveform is not positive (min sampled value {min:e} F)")]
    NonPhysicalCapacitance { min: f64 },

    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),

    #[error("external port {0} has no element attached")]
    UnconnectedPort(String),

    #[error("netlist parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("matrix is not cyclic-symmetric (violation {violation:.3e})")]
    NotCyclicSymmetric { violation: f64 },

    #[error("isolation never reaches {threshold_db} dB (maximum {max_ix_db:.2} dB)")]
    DipNotFound { threshold_db: f64, max_ix_db: f64 },

    #[error("drive frequency {frequency:.6e} Hz is not commensurate with the modulation; nearest admissible {suggested:.9e} Hz")]
    NonCommensurate { frequency: f64, suggested: f64 },

    #[error(
        "time-domain iteration did not converge after {periods} periods (residual {residual:.3e})"
    )]
    NoConvergence { periods: usize, residual: f64 },

    #[error("at {frequency:.6e} Hz: {source}")]
    AtFrequency {
        frequency: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at(self, frequency: f64) -> Self {
        match self {
            e @ Error::AtFrequency { .. } => e,
            e => Error::AtFrequency {
                frequency,
                source: Box::new(e),
            },
        }
    }
}
