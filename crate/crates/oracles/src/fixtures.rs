//! Seeded signal generators for test fixtures.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn white_noise(len: usize, std_dev: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..len)
        .map(|_| {
            let n: f64 = StandardNormal.sample(&mut r);
            std_dev * n
        })
        .collect()
}

pub fn uniform(len: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..len).map(|_| r.random_range(-1.0..1.0)).collect()
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Scales `noise` so that `energy(signal) / energy(noise) = 10^(snr/10)`.
pub fn scale_to_snr(signal: &[f64], noise: &[f64], snr_db: f64) -> Vec<f64> {
    let g = (energy(signal) / (energy(noise) * 10f64.powf(snr_db / 10.0))).sqrt();
    noise.iter().map(|v| v * g).collect()
}

/// Speech-like test signal: syllables of formant-shaped harmonic or noise
/// bursts under raised-cosine envelopes, separated by pauses.
///
/// Returns the signal and a per-sample activity flag.
pub fn speech_like(duration_s: f64, rate_hz: u32, seed: u64) -> (Vec<f64>, Vec<bool>) {
    let mut r = rng(seed);
    let len = (duration_s * rate_hz as f64) as usize;
    let fs = rate_hz as f64;
    let mut out = vec![0.0; len];
    let mut active = vec![false; len];
    let mut t = (r.random_range(0.05..0.15) * fs) as usize;
    while t < len {
        let syl = (r.random_range(0.12..0.30) * fs) as usize;
        let end = (t + syl).min(len);
        let voiced = r.random_bool(0.8);
        let f0 = r.random_range(100.0..220.0);
        let glide = r.random_range(-0.2..0.2);
        let f1 = r.random_range(300.0..900.0);
        let f2 = r.random_range(900.0..2500.0);
        let level = r.random_range(0.4..1.0);
        let harmonics = ((0.45 * fs.min(8000.0)) / (f0 * 1.25)) as usize;
        let phases: Vec<f64> = (0..harmonics).map(|_| r.random_range(0.0..2.0 * PI)).collect();
        let mut prev = 0.0;
        let mut phase0 = 0.0;
        for i in t..end {
            let u = (i - t) as f64 / (end - t) as f64;
            let env = (PI * u).sin().powi(2) * level;
            let v = if voiced {
                let f = f0 * (1.0 + glide * u);
                phase0 += 2.0 * PI * f / fs;
                let mut acc = 0.0;
                for (h, ph) in phases.iter().enumerate() {
                    let hf = f * (h + 1) as f64;
                    let amp = 1.0 / (1.0 + ((hf - f1) / 120.0).powi(2))
                        + 0.6 / (1.0 + ((hf - f2) / 180.0).powi(2))
                        + 0.02;
                    acc += amp * (phase0 * (h + 1) as f64 + ph).sin();
                }
                acc * 0.3
            } else {
                let n: f64 = StandardNormal.sample(&mut r);
                let hp = n - prev;
                prev = n;
                0.15 * hp
            };
            out[i] += env * v;
            active[i] = env > 0.05 * level;
        }
        t = end + (r.random_range(0.03..0.15) * fs) as usize;
        if r.random_bool(0.15) {
            t += (r.random_range(0.2..0.4) * fs) as usize;
        }
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    (out, active)
}

/// Fractional delay by `delay` samples via a frequency-domain phase ramp
/// (circular, computed with a direct DFT so it stays independent).
pub fn fractional_delay_circular(x: &[f64], delay: f64) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    let spec: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let a = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            (re, im)
        })
        .collect();
    for (t, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &(re, im)) in spec.iter().enumerate() {
            // Signed frequency so the phase ramp stays Hermitian.
            let kf = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let shift = if n % 2 == 0 && k == n / 2 { 0.0 } else { -2.0 * PI * kf * delay / n as f64 };
            let (cr, ci) = (shift.cos(), shift.sin());
            let (yr, yi) = (re * cr - im * ci, re * ci + im * cr);
            let a = 2.0 * PI * ((k * t) % n) as f64 / n as f64;
            acc += yr * a.cos() - yi * a.sin();
        }
        *o = acc / n as f64;
    }
    out
}
