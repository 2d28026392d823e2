//! First-order ambisonics speech enhancement workbench.
//!
//! The crate covers scene synthesis (`scene`), the per-channel spectral-mask
//! enhancer and the NCC-aligned delay-and-sum beamformer (`enhance`),
//! direction-of-arrival estimation (`doa`) and objective metrics
//! (`metrics`), on top of the numeric primitives in `dsp`.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`). The aliases
//! below pin the `f64` instantiation used by the evaluation harness.

pub mod doa;
pub mod dsp;
pub mod enhance;
mod error;
pub mod metrics;
mod scalar;
pub mod scene;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Audio = dsp::AudioBuffer<f64>;
pub type Audio32 = dsp::AudioBuffer<f32>;
pub type Spectrogram = dsp::Spectrogram<f64>;
pub type Scene = scene::BFormatScene<f64>;
pub type Scene32 = scene::BFormatScene<f32>;
pub type Rir = scene::RirSet<f64>;
