//! Direct, loop-by-loop evaluation of the published STOI procedure.

use std::f64::consts::PI;

use crate::naive_rdft;

const FS: u32 = 10_000;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut k = 1.0;
    while term > 1e-18 * sum {
        term *= (x / 2.0) * (x / 2.0) / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Windowed-sinc resampler evaluated sample by sample at continuous time.
pub fn naive_resample(x: &[f64], from: u32, to: u32) -> Vec<f64> {
    if from == to {
        return x.to_vec();
    }
    let rho = 0.95 * from.min(to) as f64 / from as f64;
    let hw = 32.0 / rho;
    let beta = 8.0;
    let out_len = (x.len() as f64 * to as f64 / from as f64).round() as usize;
    (0..out_len)
        .map(|m| {
            let t = m as f64 * from as f64 / to as f64;
            let lo = (t - hw).ceil().max(0.0) as usize;
            let hi = ((t + hw).floor() as usize).min(x.len() - 1);
            let mut acc = 0.0;
            for (j, &v) in x.iter().enumerate().take(hi + 1).skip(lo) {
                let d = t - j as f64;
                let u = d / hw;
                if u.abs() >= 1.0 {
                    continue;
                }
                let s = if d == 0.0 { 1.0 } else { (PI * rho * d).sin() / (PI * rho * d) };
                acc += v * rho * s * bessel_i0(beta * (1.0 - u * u).sqrt()) / bessel_i0(beta);
            }
            acc
        })
        .collect()
}

fn matlab_hanning(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * (i + 1) as f64 / (n + 1) as f64).cos()))
        .collect()
}

/// STOI of `degraded` against `clean`, both at `rate` Hz.
pub fn reference_stoi(clean: &[f64], degraded: &[f64], rate: u32) -> f64 {
    let n = clean.len().min(degraded.len());
    let x = naive_resample(&clean[..n], rate, FS);
    let y = naive_resample(&degraded[..n], rate, FS);

    // Silent frame removal.
    let win = matlab_hanning(256);
    let mut starts = Vec::new();
    let mut i = 0;
    while i + 256 < x.len() {
        starts.push(i);
        i += 128;
    }
    let mut e_db = Vec::new();
    for &s in &starts {
        let mut e = 0.0;
        for k in 0..256 {
            e += (win[k] * x[s + k]).powi(2);
        }
        e_db.push(20.0 * (e.sqrt() + f64::EPSILON).log10());
    }
    let max = e_db.iter().cloned().fold(f64::MIN, f64::max);
    let keep: Vec<usize> = starts
        .iter()
        .zip(&e_db)
        .filter(|(_, e)| **e > max - 40.0)
        .map(|(s, _)| *s)
        .collect();
    let len = if keep.is_empty() { 0 } else { 128 * (keep.len() - 1) + 256 };
    let mut xs = vec![0.0; len];
    let mut ys = vec![0.0; len];
    for (f, &s) in keep.iter().enumerate() {
        for k in 0..256 {
            xs[128 * f + k] += win[k] * x[s + k];
            ys[128 * f + k] += win[k] * y[s + k];
        }
    }

    // One-third-octave band edges snapped to the nearest bin.
    let freqs: Vec<f64> = (0..257).map(|b| b as f64 * FS as f64 / 512.0).collect();
    let nearest = |f: f64| {
        let mut best = 0;
        for b in 0..freqs.len() {
            if (freqs[b] - f).powi(2) < (freqs[best] - f).powi(2) {
                best = b;
            }
        }
        best
    };
    let bands: Vec<(usize, usize)> = (0..15)
        .map(|k| {
            let k = k as f64;
            (
                nearest(150.0 * 2f64.powf((2.0 * k - 1.0) / 6.0)),
                nearest(150.0 * 2f64.powf((2.0 * k + 1.0) / 6.0)),
            )
        })
        .collect();

    let envelopes = |s: &[f64]| -> Vec<Vec<f64>> {
        let mut env = vec![Vec::new(); 15];
        let mut t = 0;
        while t + 256 < s.len() {
            let frame: Vec<f64> = (0..256).map(|k| win[k] * s[t + k]).collect();
            let spec = naive_rdft(&frame, 512);
            for (b, &(lo, hi)) in bands.iter().enumerate() {
                let mut p = 0.0;
                for (re, im) in &spec[lo..hi] {
                    p += re * re + im * im;
                }
                env[b].push(p.sqrt());
            }
            t += 128;
        }
        env
    };
    let xe = envelopes(&xs);
    let ye = envelopes(&ys);
    let frames = xe[0].len();
    assert!(frames >= 30, "fixture too short for STOI");

    let c = 1.0 + 10f64.powf(15.0 / 20.0);
    let mut sum = 0.0;
    let mut count = 0.0;
    for m in 30..=frames {
        for b in 0..15 {
            let xv = &xe[b][m - 30..m];
            let yv = &ye[b][m - 30..m];
            let nx = xv.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ny = yv.iter().map(|v| v * v).sum::<f64>().sqrt();
            let alpha = nx / (ny + f64::EPSILON);
            let yp: Vec<f64> = (0..30).map(|j| (alpha * yv[j]).min(c * xv[j])).collect();
            let mx = xv.iter().sum::<f64>() / 30.0;
            let my = yp.iter().sum::<f64>() / 30.0;
            let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
            for j in 0..30 {
                sxy += (xv[j] - mx) * (yp[j] - my);
                sxx += (xv[j] - mx).powi(2);
                syy += (yp[j] - my).powi(2);
            }
            sum += sxy / ((sxx.sqrt() + f64::EPSILON) * (syy.sqrt() + f64::EPSILON));
            count += 1.0;
        }
    }
    sum / count
}
