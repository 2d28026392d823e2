//! Rational sample-rate conversion with a polyphase Kaiser-windowed sinc.

use super::AudioBuffer;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Zero crossings of the sinc kernel on each side, at the lower rate.
const ZERO_CROSSINGS: f64 = 32.0;
/// Cutoff as a fraction of the lower Nyquist frequency.
const CUTOFF: f64 = 0.95;
const KAISER_BETA: f64 = 8.0;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Windowed-sinc low-pass tap at distance `d` input samples.
fn kernel(d: f64, rho: f64, half_width: f64) -> f64 {
    let u = d / half_width;
    if u.abs() >= 1.0 {
        return 0.0;
    }
    rho * sinc(rho * d) * bessel_i0(KAISER_BETA * (1.0 - u * u).sqrt()) / bessel_i0(KAISER_BETA)
}

/// Output length is `round(len · target / source)`; sample `m` sits at input
/// time `m · source / target`.
pub fn resample<T: Real>(signal: &AudioBuffer<T>, target_rate_hz: u32) -> Result<AudioBuffer<T>> {
    if target_rate_hz == 0 {
        return Err(Error::ZeroRate);
    }
    let source = signal.sample_rate_hz();
    if source == target_rate_hz {
        return Ok(signal.clone());
    }
    let g = gcd(source as u64, target_rate_hz as u64);
    let up = target_rate_hz as u64 / g;
    let down = source as u64 / g;
    let len = signal.len() as u64;
    let out_len = ((2 * len * target_rate_hz as u64 + source as u64) / (2 * source as u64)) as usize;

    let rho = CUTOFF * (target_rate_hz.min(source) as f64) / source as f64;
    let half_width = ZERO_CROSSINGS / rho;
    let reach = half_width.ceil() as i64;
    let taps_per_phase = 2 * reach as usize;

    // taps[phase][k] multiplies x[i0 + 1 - reach + k].
    let phases: Vec<Vec<T>> = (0..up)
        .map(|phase| {
            let frac = phase as f64 / up as f64;
            (0..taps_per_phase)
                .map(|k| {
                    let d = frac + (reach - 1) as f64 - k as f64;
                    T::lit(kernel(d, rho, half_width))
                })
                .collect()
        })
        .collect();

    let x = signal.samples();
    let n = x.len() as i64;
    let out = (0..out_len as u64)
        .map(|m| {
            let pos = m * down;
            let i0 = (pos / up) as i64;
            let taps = &phases[(pos % up) as usize];
            let first = i0 + 1 - reach;
            let lo = (-first).max(0) as usize;
            let hi = ((n - first).max(0) as usize).min(taps_per_phase);
            (lo..hi)
                .map(|k| taps[k] * x[(first + k as i64) as usize])
                .fold(T::zero(), |a, b| a + b)
        })
        .collect();
    AudioBuffer::new(out, target_rate_hz)
}
