use thiserror::Error;

use crate::dsp::wav::WavError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty signal")]
    EmptySignal,
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("sample rate must be positive")]
    ZeroRate,
    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    RateMismatch(u32, u32),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid stft config: {0}")]
    InvalidStft(String),
    #[error("window/hop pair fails the overlap-add check: {0}")]
    OverlapAdd(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },
    #[error("noise has zero energy on the W channel")]
    SilentNoise,
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("no direction estimate: {0}")]
    NoEstimate(&'static str),
    #[error("no active bins above the level floor")]
    NoActiveBins,
    #[error("clean reference is silent")]
    SilentReference,
    #[error(transparent)]
    Wav(#[from] WavError),
}
