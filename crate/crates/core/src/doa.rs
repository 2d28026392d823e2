//! Direction-of-arrival estimation and angular error arithmetic.
//!
//! Errors are signed as `estimate - truth`.

use rustfft::num_complex::Complex;

use crate::dsp::{stft, AudioBuffer, RealFft, Spectrogram, StftConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scene::{cartesian_to_spherical, BFormatScene, Direction, W, X, Y, Z};

pub const SPEED_OF_SOUND_M_S: f64 = 343.0;
/// Speech-dominant band for intensity aggregation.
pub const DEFAULT_BAND_HZ: (f64, f64) = (200.0, 6000.0);
/// PHAT weighting guard.
const PHAT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaEstimate {
    pub direction: Direction,
    /// Norm of the summed intensity vector over the summed W power.
    pub confidence: f64,
}

fn check_band(band_hz: (f64, f64), rate_hz: u32) -> Result<()> {
    let nyquist = rate_hz as f64 / 2.0;
    let (lo, hi) = band_hz;
    if !(lo >= 0.0 && lo < hi && hi <= nyquist) {
        return Err(Error::InvalidParam(format!(
            "band ({lo}, {hi}) Hz not within 0..{nyquist} Hz"
        )));
    }
    Ok(())
}

/// Utterance-level pseudo-intensity DOA from the four channel spectrograms.
pub fn pseudo_intensity_from_spectra<T: Real>(
    spectra: &[Spectrogram<T>; 4],
    band_hz: (f64, f64),
) -> Result<DoaEstimate> {
    let w = &spectra[W];
    for s in &spectra[1..] {
        if !s.same_shape(w) {
            return Err(Error::LengthMismatch(s.frames(), w.frames()));
        }
    }
    check_band(band_hz, w.source_rate_hz())?;
    let bins: Vec<usize> = (0..w.bins())
        .filter(|&b| {
            let f = w.bin_frequency_hz(b);
            f >= band_hz.0 && f <= band_hz.1
        })
        .collect();
    let mut intensity = [0.0f64; 3];
    let mut w_power = 0.0f64;
    for tau in 0..w.frames() {
        for &b in &bins {
            let wc = w.get(tau, b);
            let wc = Complex::new(wc.re.as_f64(), wc.im.as_f64());
            for (acc, ch) in intensity.iter_mut().zip([X, Y, Z]) {
                let v = spectra[ch].get(tau, b);
                *acc += (wc.conj() * Complex::new(v.re.as_f64(), v.im.as_f64())).re;
            }
            w_power += wc.norm_sqr();
        }
    }
    let norm = intensity.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || !(w_power > 0.0) {
        return Err(Error::NoEstimate("zero intensity vector"));
    }
    Ok(DoaEstimate {
        direction: cartesian_to_spherical(intensity)?,
        confidence: norm / w_power,
    })
}

/// Pseudo-intensity DOA `Re{W* · [X, Y, Z]}` summed over all frames and the
/// bins inside `band_hz`.
pub fn pseudo_intensity_doa<T: Real>(
    scene: &BFormatScene<T>,
    config: &StftConfig,
    band_hz: (f64, f64),
) -> Result<DoaEstimate> {
    check_band(band_hz, scene.sample_rate_hz())?;
    let [w, x, y, z] = scene.channels();
    let spectra = [stft(w, config)?, stft(x, config)?, stft(y, config)?, stft(z, config)?];
    pseudo_intensity_from_spectra(&spectra, band_hz)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GccPhat {
    /// Positive when `b` lags `a`.
    pub tdoa_s: f64,
    /// Integer lag of the correlation peak, in samples.
    pub lag_samples: isize,
    /// Height of the whitened correlation peak (1.0 for a pure delay).
    pub peak: f64,
}

/// GCC-PHAT time difference of arrival between two equal-length signals,
/// searched over `±max_lag_s` with parabolic sub-sample refinement.
pub fn gcc_phat<T: Real>(a: &AudioBuffer<T>, b: &AudioBuffer<T>, max_lag_s: f64) -> Result<GccPhat> {
    let rate = a.sample_rate_hz();
    if b.sample_rate_hz() != rate {
        return Err(Error::RateMismatch(rate, b.sample_rate_hz()));
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if !(max_lag_s >= 0.0) || !max_lag_s.is_finite() {
        return Err(Error::InvalidParam(format!("max_lag_s {max_lag_s}")));
    }
    let max_lag = (max_lag_s * rate as f64).floor() as usize;
    let len = a.len();
    if len == 0 || 2 * max_lag > len {
        return Err(Error::InvalidParam(format!(
            "max lag of {max_lag} samples exceeds half the {len}-sample signal"
        )));
    }
    let silent = |x: &AudioBuffer<T>| x.samples().iter().all(|v| *v == T::zero());
    if silent(a) || silent(b) {
        return Err(Error::NoEstimate("silent input"));
    }

    let n = (2 * len).next_power_of_two();
    let mut fft = RealFft::<f64>::new(n);
    let to_f64 = |x: &AudioBuffer<T>| x.samples().iter().map(|v| v.as_f64()).collect::<Vec<_>>();
    let mut fa = vec![Complex::default(); fft.bins()];
    let mut fb = vec![Complex::default(); fft.bins()];
    fft.forward(&to_f64(a), &mut fa);
    fft.forward(&to_f64(b), &mut fb);
    let cross: Vec<Complex<f64>> = fa
        .iter()
        .zip(&fb)
        .map(|(x, y)| {
            let g = x.conj() * y;
            g / (g.norm() + PHAT_EPS)
        })
        .collect();
    let mut r = vec![0.0; n];
    fft.inverse(&cross, &mut r);
    let at = |lag: isize| r[lag.rem_euclid(n as isize) as usize] / n as f64;

    let lag_max = max_lag as isize;
    let (best, peak) = (-lag_max..=lag_max).fold((0isize, f64::NEG_INFINITY), |(bl, bv), l| {
        let v = at(l);
        if v > bv {
            (l, v)
        } else {
            (bl, bv)
        }
    });
    let (ym, yp) = (at(best - 1), at(best + 1));
    let curvature = ym - 2.0 * peak + yp;
    let offset = if curvature < 0.0 {
        (0.5 * (ym - yp) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Ok(GccPhat {
        tdoa_s: (best as f64 + offset) / rate as f64,
        lag_samples: best,
        peak,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularError {
    /// `est - truth` azimuth wrapped to `(-180, 180]`.
    pub d_azimuth_deg: f64,
    pub d_elevation_deg: f64,
    /// Angle between the two unit vectors, `[0, 180]`.
    pub great_circle_deg: f64,
}

pub fn great_circle_deg(a: &Direction, b: &Direction) -> f64 {
    let u = a.unit_vector();
    let v = b.unit_vector();
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    // atan2 equals the clamped arccos of the dot product but keeps precision
    // near 0 and 180 degrees.
    sin.atan2(dot).to_degrees()
}

pub fn angular_error(est: &Direction, truth: &Direction) -> AngularError {
    let raw = est.azimuth_deg() - truth.azimuth_deg();
    let mut d_az = raw - 360.0 * ((raw + 180.0) / 360.0).floor();
    if d_az <= -180.0 {
        d_az += 360.0;
    }
    AngularError {
        d_azimuth_deg: d_az,
        d_elevation_deg: est.elevation_deg() - truth.elevation_deg(),
        great_circle_deg: great_circle_deg(est, truth),
    }
}
