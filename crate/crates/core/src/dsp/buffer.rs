use crate::error::{Error, Result};
use crate::scalar::Real;

/// A mono sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer<T = f64> {
    samples: Vec<T>,
    sample_rate_hz: u32,
}

impl<T: Real> AudioBuffer<T> {
    /// Validates the rate and that every sample is finite. Empty buffers are
    /// allowed; operations that need data reject them.
    pub fn new(samples: Vec<T>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::ZeroRate);
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn zeros(len: usize, sample_rate_hz: u32) -> Result<Self> {
        Self::new(vec![T::zero(); len], sample_rate_hz)
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn energy(&self) -> T {
        self.samples.iter().map(|&s| s * s).sum()
    }

    /// Maps every sample through `f`, re-validating finiteness.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.samples.iter().map(|&s| f(s)).collect(), self.sample_rate_hz)
    }

    pub fn scaled(&self, gain: T) -> Result<Self> {
        self.map(|s| s * gain)
    }

    /// Zero-pads or truncates at the tail.
    pub fn resized(&self, len: usize) -> Self {
        let mut samples = self.samples.clone();
        samples.resize(len, T::zero());
        Self {
            samples,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.samples.is_empty() {
            Err(Error::EmptySignal)
        } else {
            Ok(())
        }
    }

    /// Converts the scalar type, e.g. `f32` to `f64`.
    pub fn cast<U: Real>(&self) -> AudioBuffer<U> {
        AudioBuffer {
            samples: self.samples.iter().map(|&s| U::lit(s.as_f64())).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}
