//! Test-only references. Nothing here depends on `sebench-core`: every
//! routine is a slow, direct evaluation of the textbook definition so it
//! can check the fast implementations independently.

pub mod fixtures;
pub mod stoi;

use std::f64::consts::PI;

/// O(n·m) full linear convolution.
pub fn direct_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn relative_l2(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let num: f64 = got.iter().zip(want).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = want.iter().map(|b| b * b).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Naive DFT of a real frame, first `n/2 + 1` bins, as (re, im).
pub fn naive_rdft(x: &[f64], n: usize) -> Vec<(f64, f64)> {
    (0..=n / 2)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (t, &v) in x.iter().enumerate().take(n) {
                let ang = -2.0 * PI * (k * t % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            (re, im)
        })
        .collect()
}

/// Exhaustive summed windowed NCC between `reference[n]` and
/// `channel[n + d]` for every lag, written without any shared helpers.
pub fn exhaustive_ncc(reference: &[f64], channel: &[f64], window: usize, max_lag: usize) -> Vec<f64> {
    let len = reference.len();
    let windows = (len / window).max(1);
    let mut curve = Vec::new();
    for d in -(max_lag as i64)..=(max_lag as i64) {
        let mut total = 0.0;
        for k in 0..windows {
            let start = k * window;
            let end = (start + window).min(len);
            let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
            for n in start..end {
                xx += reference[n] * reference[n];
                let m = n as i64 + d;
                if m >= 0 && (m as usize) < channel.len() {
                    let c = channel[m as usize];
                    xy += reference[n] * c;
                    yy += c * c;
                }
            }
            if xx > 0.0 && yy > 0.0 {
                total += xy / (xx * yy).sqrt();
            }
        }
        curve.push(total);
    }
    curve
}

/// First index of the maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Grid-search DOA: steer a cardioid over a `step_deg` grid and return the
/// (azimuth, elevation) with maximum output power.
pub fn cardioid_grid_doa(w: &[f64], x: &[f64], y: &[f64], z: &[f64], w_gain: f64, step_deg: f64) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    let mut best_power = f64::NEG_INFINITY;
    let mut el = -90.0;
    while el <= 90.0 + 1e-9 {
        let mut az = -180.0;
        while az < 180.0 - 1e-9 {
            let (a, e) = (az * PI / 180.0, el * PI / 180.0);
            let (ux, uy, uz) = (a.cos() * e.cos(), a.sin() * e.cos(), e.sin());
            let mut power = 0.0;
            for i in 0..w.len() {
                let m = 0.5 * w[i] / w_gain + 0.5 * (ux * x[i] + uy * y[i] + uz * z[i]);
                power += m * m;
            }
            if power > best_power {
                best_power = power;
                best = (az, el);
            }
            az += step_deg;
        }
        el += step_deg;
    }
    best
}

/// Angle between two (azimuth, elevation) pairs in degrees.
pub fn angle_between_deg(a: (f64, f64), b: (f64, f64)) -> f64 {
    let v = |(az, el): (f64, f64)| {
        let (az, el) = (az.to_radians(), el.to_radians());
        [az.cos() * el.cos(), az.sin() * el.cos(), el.sin()]
    };
    let (u, w) = (v(a), v(b));
    let dot: f64 = u.iter().zip(&w).map(|(p, q)| p * q).sum();
    dot.clamp(-1.0, 1.0).acos().to_degrees()
}
