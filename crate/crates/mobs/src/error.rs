use thiserror::Error;

/// Errors reported by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is out of range or otherwise unusable.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Operands do not share the dimensions the operation requires.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Serialized data failed to parse; `offset` is the byte where
    /// decoding gave up.
    #[error("malformed data at byte {offset}: {reason}")]
    Codec { offset: usize, reason: String },

    /// Bisection endpoints lie on the same side of the target ratio.
    #[error(
        "bisection bracket [{lo}, {hi}] does not straddle the target: \
         ratio {ratio_lo:.4} at {lo}, ratio {ratio_hi:.4} at {hi}"
    )]
    NonBracketing {
        lo: f64,
        hi: f64,
        ratio_lo: f64,
        ratio_hi: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn codec(offset: usize, reason: impl Into<String>) -> Self {
        Error::Codec {
            offset,
            reason: reason.into(),
        }
    }
}
