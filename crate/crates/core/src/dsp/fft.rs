use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::AudioBuffer;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Forward/inverse transform pair of a fixed length for real signals.
///
/// Forward returns the `n/2 + 1` non-negative frequency bins; inverse takes
/// them back (Hermitian-extended) and returns the unnormalized real part,
/// i.e. `n · x`.
pub(crate) struct RealFft<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    buf: Vec<Complex<T>>,
}

impl<T: Real> RealFft<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex::default(); scratch_len],
            buf: vec![Complex::default(); n],
        }
    }

    pub fn bins(&self) -> usize {
        self.n / 2 + 1
    }

    /// `input` shorter than `n` is zero-padded.
    pub fn forward(&mut self, input: &[T], out: &mut [Complex<T>]) {
        debug_assert!(input.len() <= self.n && out.len() == self.bins());
        for (slot, i) in self.buf.iter_mut().zip(0..) {
            *slot = Complex::new(input.get(i).copied().unwrap_or_else(T::zero), T::zero());
        }
        self.forward
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        out.copy_from_slice(&self.buf[..self.bins()]);
    }

    pub fn inverse(&mut self, spectrum: &[Complex<T>], out: &mut [T]) {
        let n = self.n;
        let half = self.bins();
        debug_assert!(spectrum.len() == half && out.len() == n);
        self.buf[..half].copy_from_slice(spectrum);
        for k in half..n {
            self.buf[k] = spectrum[n - k].conj();
        }
        // DC and Nyquist must be real for a real output.
        self.buf[0].im = T::zero();
        if n % 2 == 0 {
            self.buf[n / 2].im = T::zero();
        }
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        for (o, c) in out.iter_mut().zip(&self.buf) {
            *o = c.re;
        }
    }
}

/// Full linear convolution of two real sequences via zero-padded FFT.
pub fn fft_convolve_taps<T: Real>(a: &[T], b: &[T]) -> Result<Vec<T>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySignal);
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fft = RealFft::new(n);
    let mut fa = vec![Complex::default(); fft.bins()];
    let mut fb = vec![Complex::default(); fft.bins()];
    fft.forward(a, &mut fa);
    fft.forward(b, &mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * *y;
    }
    let mut out = vec![T::zero(); n];
    fft.inverse(&fa, &mut out);
    let scale = T::one() / T::from_usize_lossy(n);
    out.truncate(out_len);
    out.iter_mut().for_each(|v| *v = *v * scale);
    Ok(out)
}

/// Convolves a signal with a real tap sequence; output length is
/// `a.len() + taps.len() - 1`.
pub fn fft_convolve<T: Real>(a: &AudioBuffer<T>, taps: &[T]) -> Result<AudioBuffer<T>> {
    let out = fft_convolve_taps(a.samples(), taps)?;
    AudioBuffer::new(out, a.sample_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_small_case() {
        let a = AudioBuffer::new(vec![1.0f64, 2.0, 3.0], 16_000).unwrap();
        let y = fft_convolve(&a, &[1.0]).unwrap();
        for (got, want) in y.samples().iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let y = fft_convolve_taps(&[1.0f64, 2.0], &[3.0, 4.0]).unwrap();
        for (got, want) in y.iter().zip([3.0, 10.0, 8.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_operand_is_an_error() {
        assert!(matches!(
            fft_convolve_taps::<f64>(&[], &[1.0]),
            Err(Error::EmptySignal)
        ));
        assert!(fft_convolve_taps::<f64>(&[1.0], &[]).is_err());
    }

    #[test]
    fn real_fft_round_trip_odd_length() {
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut fft = RealFft::new(9);
        let mut spec = vec![Complex::default(); fft.bins()];
        fft.forward(&x, &mut spec);
        let mut back = vec![0.0; 9];
        fft.inverse(&spec, &mut back);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b / 9.0).abs() < 1e-12);
        }
    }
}
