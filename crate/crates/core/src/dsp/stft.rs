//! Short-time Fourier analysis and weighted overlap-add synthesis.
//!
//! Framing policy: the signal is reflect-padded by `fft_size / 2` samples on
//! both sides so frame `τ` is centred on sample `τ · hop`. Frames continue
//! until every original sample is covered by all frames that overlap it,
//! which gives `ceil((len + fft_size/2) / hop)` frames. Samples needed past
//! the right reflection are zero.
//!
//! Synthesis applies the same window again and divides by the accumulated
//! squared window, so any window/hop pair whose squared windows never sum to
//! zero reconstructs exactly.

use rustfft::num_complex::Complex;

use super::{AudioBuffer, RealFft};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative floor on the overlapped squared-window sum.
const OVERLAP_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Window {
    Rectangular,
    Hann,
    #[default]
    SqrtHann,
}

impl Window {
    /// Periodic window of length `n`.
    pub fn coefficients<T: Real>(self, n: usize) -> Vec<T> {
        let two_pi = T::PI() + T::PI();
        let nn = T::from_usize_lossy(n);
        (0..n)
            .map(|k| {
                let hann = || {
                    let phase = two_pi * T::from_usize_lossy(k) / nn;
                    T::lit(0.5) - T::lit(0.5) * phase.cos()
                };
                match self {
                    Window::Rectangular => T::one(),
                    Window::Hann => hann(),
                    Window::SqrtHann => hann().max(T::zero()).sqrt(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StftConfig {
    fft_size: usize,
    hop_size: usize,
    window: Window,
}

impl Default for StftConfig {
    /// 512-point frames with 50 % overlap and a square-root Hann window.
    fn default() -> Self {
        Self {
            fft_size: 512,
            hop_size: 256,
            window: Window::SqrtHann,
        }
    }
}

impl StftConfig {
    pub fn new(fft_size: usize, hop_size: usize, window: Window) -> Result<Self> {
        if fft_size < 2 || !fft_size.is_power_of_two() {
            return Err(Error::InvalidStft(format!(
                "fft_size {fft_size} is not a power of two >= 2"
            )));
        }
        if hop_size == 0 || hop_size > fft_size {
            return Err(Error::InvalidStft(format!(
                "hop_size {hop_size} outside 1..={fft_size}"
            )));
        }
        let cfg = Self {
            fft_size,
            hop_size,
            window,
        };
        let (min, max) = cfg.overlap_range();
        if !(min > OVERLAP_FLOOR * max) {
            return Err(Error::OverlapAdd(format!(
                "{window:?} window at hop {hop_size}/{fft_size}: squared-window sum drops to {min:.3e}"
            )));
        }
        Ok(cfg)
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn hop_size(&self) -> usize {
        self.hop_size
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn frame_count(&self, len: usize) -> usize {
        (len + self.fft_size / 2).div_ceil(self.hop_size)
    }

    /// Min and max of the steady-state sum of shifted squared windows.
    pub fn overlap_range(&self) -> (f64, f64) {
        let w: Vec<f64> = self.window.coefficients(self.fft_size);
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for n in 0..self.hop_size {
            let s: f64 = w.iter().skip(n).step_by(self.hop_size).map(|v| v * v).sum();
            min = min.min(s);
            max = max.max(s);
        }
        (min, max)
    }

    /// True when the squared window sums to a constant (classical COLA for
    /// analysis + synthesis windowing).
    pub fn is_constant_overlap_add(&self) -> bool {
        let (min, max) = self.overlap_range();
        (max - min) <= 1e-9 * max
    }
}

/// Complex time-frequency matrix, row-major `[frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T = f64> {
    data: Vec<Complex<T>>,
    frames: usize,
    config: StftConfig,
    source_rate_hz: u32,
    source_length: usize,
}

impl<T: Real> Spectrogram<T> {
    pub fn from_parts(
        data: Vec<Complex<T>>,
        frames: usize,
        config: StftConfig,
        source_rate_hz: u32,
        source_length: usize,
    ) -> Result<Self> {
        if source_rate_hz == 0 {
            return Err(Error::ZeroRate);
        }
        if data.len() != frames * config.bins() {
            return Err(Error::LengthMismatch(data.len(), frames * config.bins()));
        }
        if let Some(index) = data.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            data,
            frames,
            config,
            source_rate_hz,
            source_length,
        })
    }

    /// Same framing metadata, new bin values.
    pub fn with_data(&self, data: Vec<Complex<T>>) -> Result<Self> {
        Self::from_parts(
            data,
            self.frames,
            self.config,
            self.source_rate_hz,
            self.source_length,
        )
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            data: vec![Complex::default(); self.data.len()],
            ..self.clone()
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.config.bins()
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn source_rate_hz(&self) -> u32 {
        self.source_rate_hz
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn frame(&self, tau: usize) -> &[Complex<T>] {
        let b = self.bins();
        &self.data[tau * b..(tau + 1) * b]
    }

    pub fn get(&self, tau: usize, bin: usize) -> Complex<T> {
        self.data[tau * self.bins() + bin]
    }

    pub fn bin_frequency_hz(&self, bin: usize) -> f64 {
        bin as f64 * self.source_rate_hz as f64 / self.config.fft_size as f64
    }

    /// Same-shaped check used before combining two spectrograms.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.frames == other.frames && self.config == other.config
    }
}

fn reflect_index(idx: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = idx.rem_euclid(period);
    if m >= len as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

pub fn stft<T: Real>(signal: &AudioBuffer<T>, config: &StftConfig) -> Result<Spectrogram<T>> {
    signal.require_non_empty()?;
    let x = signal.samples();
    if let Some(index) = x.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let n = config.fft_size;
    let hop = config.hop_size;
    let pad = (n / 2) as isize;
    let len = x.len() as isize;
    let frames = config.frame_count(x.len());
    let window: Vec<T> = config.window.coefficients(n);
    let sample = |p: isize| -> T {
        let idx = p - pad;
        if (0..len).contains(&idx) {
            x[idx as usize]
        } else if idx < 0 || idx < len + pad {
            x[reflect_index(idx, x.len())]
        } else {
            T::zero()
        }
    };

    let mut fft = RealFft::new(n);
    let bins = config.bins();
    let mut data = vec![Complex::default(); frames * bins];
    let mut frame = vec![T::zero(); n];
    for (tau, out) in data.chunks_exact_mut(bins).enumerate() {
        let start = (tau * hop) as isize;
        for (i, (f, w)) in frame.iter_mut().zip(&window).enumerate() {
            *f = *w * sample(start + i as isize);
        }
        fft.forward(&frame, out);
    }
    Spectrogram::from_parts(data, frames, *config, signal.sample_rate_hz(), x.len())
}

pub fn istft<T: Real>(spec: &Spectrogram<T>) -> Result<AudioBuffer<T>> {
    let config = spec.config;
    let n = config.fft_size;
    let hop = config.hop_size;
    let pad = n / 2;
    let out_len = spec.source_length;
    if spec.frames == 0 {
        return AudioBuffer::zeros(out_len, spec.source_rate_hz);
    }
    let window: Vec<T> = config.window.coefficients(n);
    let total = (spec.frames - 1) * hop + n;
    let mut acc = vec![T::zero(); total];
    let mut norm = vec![T::zero(); total];
    let mut fft = RealFft::new(n);
    let mut frame = vec![T::zero(); n];
    let scale = T::one() / T::from_usize_lossy(n);
    for tau in 0..spec.frames {
        fft.inverse(spec.frame(tau), &mut frame);
        let start = tau * hop;
        for (i, (&v, &w)) in frame.iter().zip(&window).enumerate() {
            acc[start + i] = acc[start + i] + v * scale * w;
            norm[start + i] = norm[start + i] + w * w;
        }
    }
    if total < pad + out_len {
        return Err(Error::OverlapAdd(format!(
            "{} frames cannot cover {} samples",
            spec.frames, out_len
        )));
    }
    let floor = T::lit(OVERLAP_FLOOR);
    let mut out = Vec::with_capacity(out_len);
    for p in pad..pad + out_len {
        if norm[p] <= floor {
            return Err(Error::OverlapAdd(format!(
                "squared-window sum vanishes at sample {}",
                p - pad
            )));
        }
        out.push(acc[p] / norm[p]);
    }
    AudioBuffer::new(out, spec.source_rate_hz)
}
