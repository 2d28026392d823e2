//! Short-time objective intelligibility.
//!
//! The pipeline follows the published algorithm and the widely used
//! reference port: 10 kHz processing rate, silent-frame removal 40 dB below
//! the loudest clean frame, 256-sample Hann frames with 50 % overlap zero
//! padded to 512, 15 one-third-octave bands from 150 Hz, 30-frame segments,
//! clipping at -15 dB signal-to-distortion, and the mean of all band/segment
//! correlations.

use rustfft::num_complex::Complex;

use crate::dsp::{resample, AudioBuffer, RealFft};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const STOI_RATE_HZ: u32 = 10_000;
const FRAME_LEN: usize = 256;
const HOP: usize = FRAME_LEN / 2;
const NFFT: usize = 512;
const NUM_BANDS: usize = 15;
const MIN_FREQ_HZ: f64 = 150.0;
const SEGMENT_FRAMES: usize = 30;
const BETA_DB: f64 = -15.0;
const DYN_RANGE_DB: f64 = 40.0;

/// Unclamped mean short-time correlation; 1.0 for identical signals.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StoiScore(pub f64);

impl StoiScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Symmetric Hann of length `n` without its zero end points
/// (MATLAB `hanning(n)`).
fn hanning(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n + 1) as f64).cos())
        .collect()
}

/// Bin ranges `[lo, hi)` of the one-third-octave bands for a `nfft`-point
/// transform at `rate_hz`. Band edges `150·2^((2k±1)/6)` snap to the
/// nearest FFT bin.
pub fn third_octave_bands(rate_hz: u32, nfft: usize) -> Vec<(usize, usize)> {
    let bins = nfft / 2 + 1;
    let freq = |b: usize| b as f64 * rate_hz as f64 / nfft as f64;
    let nearest = |target: f64| {
        (0..bins)
            .min_by(|&a, &b| {
                let da = (freq(a) - target).powi(2);
                let db = (freq(b) - target).powi(2);
                da.partial_cmp(&db).expect("finite")
            })
            .expect("at least one bin")
    };
    (0..NUM_BANDS)
        .map(|k| {
            let k = k as f64;
            let lo = MIN_FREQ_HZ * 2f64.powf((2.0 * k - 1.0) / 6.0);
            let hi = MIN_FREQ_HZ * 2f64.powf((2.0 * k + 1.0) / 6.0);
            (nearest(lo), nearest(hi))
        })
        .collect()
}

fn frame_starts(len: usize) -> impl Iterator<Item = usize> {
    (0..len.saturating_sub(FRAME_LEN)).step_by(HOP)
}

/// Drops frames more than `DYN_RANGE_DB` below the loudest clean frame and
/// overlap-adds the remaining windowed frames of both signals.
fn remove_silent_frames(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let w = hanning(FRAME_LEN);
    let windowed = |s: &[f64], start: usize| -> Vec<f64> {
        s[start..start + FRAME_LEN]
            .iter()
            .zip(&w)
            .map(|(a, b)| a * b)
            .collect()
    };
    let starts: Vec<usize> = frame_starts(x.len()).collect();
    let energies: Vec<f64> = starts
        .iter()
        .map(|&s| {
            let norm = windowed(x, s).iter().map(|v| v * v).sum::<f64>().sqrt();
            20.0 * (norm + f64::EPSILON).log10()
        })
        .collect();
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = starts
        .iter()
        .zip(&energies)
        .filter(|(_, &e)| max - DYN_RANGE_DB - e < 0.0)
        .map(|(&s, _)| s)
        .collect();
    let out_len = if kept.is_empty() {
        0
    } else {
        (kept.len() - 1) * HOP + FRAME_LEN
    };
    let mut xs = vec![0.0; out_len];
    let mut ys = vec![0.0; out_len];
    for (i, &s) in kept.iter().enumerate() {
        let (fx, fy) = (windowed(x, s), windowed(y, s));
        for j in 0..FRAME_LEN {
            xs[i * HOP + j] += fx[j];
            ys[i * HOP + j] += fy[j];
        }
    }
    (xs, ys)
}

/// One-third-octave band envelopes, `[band][frame]`.
fn band_envelopes(x: &[f64], bands: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let w = hanning(FRAME_LEN);
    let mut fft = RealFft::<f64>::new(NFFT);
    let mut spec = vec![Complex::default(); NFFT / 2 + 1];
    let mut frame = vec![0.0; FRAME_LEN];
    let mut env = vec![Vec::new(); bands.len()];
    for start in frame_starts(x.len()) {
        for (f, (s, wv)) in frame.iter_mut().zip(x[start..start + FRAME_LEN].iter().zip(&w)) {
            *f = s * wv;
        }
        fft.forward(&frame, &mut spec);
        for (e, &(lo, hi)) in env.iter_mut().zip(bands) {
            e.push(spec[lo..hi].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
        }
    }
    env
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn centred_unit(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|a| *a -= mean);
    let n = norm(v) + f64::EPSILON;
    v.iter_mut().for_each(|a| *a /= n);
}

/// Intelligibility of `degraded` against `clean`. Both are trimmed to the
/// shorter length and resampled to 10 kHz.
pub fn stoi<T: Real>(clean: &AudioBuffer<T>, degraded: &AudioBuffer<T>) -> Result<StoiScore> {
    if clean.sample_rate_hz() != degraded.sample_rate_hz() {
        return Err(Error::RateMismatch(
            clean.sample_rate_hz(),
            degraded.sample_rate_hz(),
        ));
    }
    let len = clean.len().min(degraded.len());
    let prepare = |s: &AudioBuffer<T>| -> Result<Vec<f64>> {
        let trimmed: AudioBuffer<f64> = s.resized(len).cast();
        Ok(resample(&trimmed, STOI_RATE_HZ)?.into_samples())
    };
    let x = prepare(clean)?;
    let y = prepare(degraded)?;
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::SilentReference);
    }
    let (x, y) = remove_silent_frames(&x, &y);
    let bands = third_octave_bands(STOI_RATE_HZ, NFFT);
    let x_env = band_envelopes(&x, &bands);
    let y_env = band_envelopes(&y, &bands);
    let frames = x_env[0].len();
    if frames < SEGMENT_FRAMES {
        return Err(Error::TooFewFrames {
            needed: SEGMENT_FRAMES,
            got: frames,
        });
    }

    let clip = 1.0 + 10f64.powf(-BETA_DB / 20.0);
    let mut total = 0.0;
    let mut count = 0usize;
    for end in SEGMENT_FRAMES..=frames {
        for (xb, yb) in x_env.iter().zip(&y_env) {
            let mut xs = xb[end - SEGMENT_FRAMES..end].to_vec();
            let ys = &yb[end - SEGMENT_FRAMES..end];
            let scale = norm(&xs) / (norm(ys) + f64::EPSILON);
            let mut yp: Vec<f64> = ys
                .iter()
                .zip(&xs)
                .map(|(&yv, &xv)| (yv * scale).min(xv * clip))
                .collect();
            centred_unit(&mut yp);
            centred_unit(&mut xs);
            total += yp.iter().zip(&xs).map(|(a, b)| a * b).sum::<f64>();
            count += 1;
        }
    }
    Ok(StoiScore(total / count as f64))
}
