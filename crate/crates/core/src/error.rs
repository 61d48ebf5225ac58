use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Evaluation point coincides with a point source.
    Singularity,
    InsideExclusionBall {
        distance: f64,
        radius: f64,
    },
    InvalidParameter {
        name: &'static str,
        reason: String,
    },
    LengthMismatch {
        expected: usize,
        actual: usize,
    },
    OutOfSupport {
        f: f64,
        lo: f64,
        hi: f64,
    },
    EmptyGrid,
    /// A binaural channel is zero, so interaural cues are undefined.
    ZeroChannel,
    DegenerateGeometry(String),
    /// The ITD table cannot be made monotone.
    DegenerateLookup,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Singularity => write!(f, "evaluation point coincides with a point source"),
            Error::InsideExclusionBall { distance, radius } => {
                write!(f, "emitter lies {distance:.4} m from the head center, inside the {radius} m exclusion ball")
            }
            Error::InvalidParameter { name, reason } => write!(f, "invalid parameter `{name}`: {reason}"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "length mismatch: expected {expected}, got {actual}")
            }
            Error::OutOfSupport { f: freq, lo, hi } => {
                write!(f, "frequency {freq} Hz outside the table support [{lo}, {hi}] Hz")
            }
            Error::EmptyGrid => write!(f, "grid is empty"),
            Error::ZeroChannel => write!(f, "binaural channel is zero; cues are undefined"),
            Error::DegenerateGeometry(why) => write!(f, "degenerate geometry: {why}"),
            Error::DegenerateLookup => write!(f, "ITD lookup cannot be made monotone"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
