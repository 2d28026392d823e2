//! Numeric primitives: FFT convolution, STFT/ISTFT, resampling and WAV I/O.
//!
//! Everything here is a pure function of its inputs. Internal math runs in
//! the caller's scalar type; quantization only happens at the WAV boundary.

mod buffer;
mod fft;
pub mod resample;
pub mod stft;
pub mod wav;

pub use buffer::AudioBuffer;
pub use fft::{fft_convolve, fft_convolve_taps};
pub(crate) use fft::RealFft;

pub use resample::resample;
pub use stft::{istft, stft, Spectrogram, StftConfig, Window};
pub use wav::{read_wav, write_wav, BitDepth, WavError};
