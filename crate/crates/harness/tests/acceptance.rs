//! Acceptance gate: one PASS/FAIL line per headline criterion.
//!
//! Run with `cargo test -p sebench-harness --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sebench_core::doa::{angular_error, gcc_phat, great_circle_deg, pseudo_intensity_doa, DEFAULT_BAND_HZ, SPEED_OF_SOUND_M_S};
use sebench_core::dsp::{fft_convolve_taps, istft, stft, AudioBuffer, StftConfig, Window};
use sebench_core::enhance::{
    delay_sum_beamform, enhance_multichannel, enhance_multichannel_detailed, ncc_align, BeamformerParams, ChannelMode,
    MaskParams,
};
use sebench_core::metrics::{spatial_deviation, stoi, DEFAULT_FLOOR_DBFS};
use sebench_core::scene::{encode_plane_wave, mix_scene, BFormatScene, Direction, DEFAULT_W_GAIN};
use sebench_harness::config::SynthSection;
use sebench_harness::eval::OutputKind;
use sebench_harness::fixtures::synth_fixtures;
use sebench_harness::report::to_json;
use sebench_harness::{read_manifest, run_eval, Pipeline, RunConfig};
use sebench_oracles::fixtures::{fractional_delay_circular, scale_to_snr, speech_like, uniform, white_noise};
use sebench_oracles::stoi::reference_stoi;
use sebench_oracles::{direct_convolve, relative_l2};

// Tolerances and budgets.
const ICPD_MAX_RAD: f64 = 1e-9;
const DOA_MAX_DEG: f64 = 2.0;
const DOA_MEDIAN_DEG: f64 = 0.5;
const ARRAY_GAIN_TOL_DB: f64 = 0.5;
const STOI_ORACLE_TOL: f64 = 1e-3;
const STOI_SELF_TOL: f64 = 1e-6;
const CONV_REL_TOL: f64 = 1e-9;
const STFT_REL_TOL: f64 = 1e-9;
const ANGLE_TOL_DEG: f64 = 1e-9;
const ONE_MINUTE: Duration = Duration::from_secs(60);
const TWO_MINUTES: Duration = Duration::from_secs(120);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn buf(x: Vec<f64>, rate: u32) -> AudioBuffer<f64> {
    AudioBuffer::new(x, rate).unwrap()
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn random_direction(r: &mut ChaCha8Rng) -> Direction {
    let az = r.random_range(-180.0..180.0);
    let el = r.random_range(-1.0f64..1.0).asin().to_degrees();
    Direction::new(az, el).unwrap()
}

fn noisy_plane_wave(speech_seed: u64, d: &Direction, snr_db: f64, dur: f64) -> BFormatScene<f64> {
    let (s, _) = speech_like(dur, 16_000, speech_seed);
    let len = s.len();
    let clean = encode_plane_wave(&buf(s, 16_000), d, DEFAULT_W_GAIN).unwrap();
    let noise = (0..4)
        .map(|c| buf(white_noise(len, 1.0, speech_seed * 17 + c + 1), 16_000))
        .collect();
    mix_scene(&clean, &BFormatScene::from_vec(noise).unwrap(), snr_db).unwrap()
}

fn icpd_preservation() -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let config = StftConfig::default();
    let mut worst = 0.0f64;
    let mut bins = 0usize;
    for k in 0..50u64 {
        let d = random_direction(&mut r);
        let snr = r.random_range(-5.0..20.0);
        let dur = r.random_range(1.0..2.0);
        let params = MaskParams {
            noise_percentile: r.random_range(0.05..0.95),
            floor_gain: r.random_range(0.0..0.5),
            oversubtraction: r.random_range(1.0..4.0),
            smoothing_frames: r.random_range(0..4),
        };
        let scene = noisy_plane_wave(100 + k, &d, snr, dur);
        let out = enhance_multichannel_detailed(&scene, ChannelMode::PerChannel, &params, &config).unwrap();
        let dev = spatial_deviation(&out.noisy, &out.enhanced, DEFAULT_FLOOR_DBFS).unwrap();
        worst = worst.max(dev.icpd_rms_rad);
        bins += dev.active_bin_count;
    }
    let t = start.elapsed();
    outcome(
        worst < ICPD_MAX_RAD && t < ONE_MINUTE,
        format!("50 scenes, max icpd_rms {worst:.3e} rad over {bins} active bins, {:.1} s", t.as_secs_f64()),
    )
}

fn doa_errors(smoothing: Option<usize>) -> Vec<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let config = StftConfig::default();
    (0..20u64)
        .map(|k| {
            let truth = random_direction(&mut r);
            let scene = noisy_plane_wave(300 + k, &truth, 10.0, 3.0);
            let scene = match smoothing {
                Some(s) => {
                    let params = MaskParams {
                        smoothing_frames: s,
                        ..MaskParams::default()
                    };
                    enhance_multichannel(&scene, ChannelMode::PerChannel, &params, &config).unwrap()
                }
                None => scene,
            };
            let est = pseudo_intensity_doa(&scene, &config, DEFAULT_BAND_HZ).unwrap();
            great_circle_deg(&est.direction, &truth)
        })
        .collect()
}

fn doa_preservation() -> Outcome {
    let start = Instant::now();
    let errors = doa_errors(Some(MaskParams::default().smoothing_frames));
    let max = errors.iter().copied().fold(0.0, f64::max);
    let med = median(errors);
    let t = start.elapsed();
    // Context only: the unprocessed scenes and unsmoothed masks.
    let raw = median(doa_errors(None));
    let unsmoothed = median(doa_errors(Some(0)));
    outcome(
        max <= DOA_MAX_DEG && med <= DOA_MEDIAN_DEG && t < TWO_MINUTES,
        format!(
            "20 directions, max {max:.3}°, median {med:.3}°, {:.1} s (median before enhancement {raw:.3}°, \
             with smoothing_frames 0 {unsmoothed:.3}°)",
            t.as_secs_f64()
        ),
    )
}

fn eval_suite(dir: &Path, suite: &SynthSection, seed: u64) -> sebench_harness::EvalReport {
    let manifest = synth_fixtures(dir, suite, seed).unwrap();
    let entries = read_manifest(&manifest).unwrap();
    run_eval(&entries, &RunConfig::default()).unwrap()
}

fn miso_collapse(report: &sebench_harness::EvalReport) -> Outcome {
    let miso: Vec<_> = report.records.iter().filter(|r| r.pipeline == Pipeline::MisoDelaySum).collect();
    let scene_doa = report
        .records
        .iter()
        .filter(|r| r.pipeline.outputs_scene())
        .all(|r| r.doa.is_some());
    let absent = miso
        .iter()
        .all(|r| r.output == OutputKind::Mono && r.doa.is_none() && r.angular_error.is_none() && r.spatial.is_none());
    outcome(
        !miso.is_empty() && miso.len() == report.entries_processed && absent && scene_doa,
        format!("{} miso records, all mono without DOA: {absent}", miso.len()),
    )
}

fn array_gain(report: &sebench_harness::EvalReport) -> Outcome {
    let mean = |p: Pipeline, f: &dyn Fn(&sebench_harness::Record) -> f64| {
        let v: Vec<f64> = report.records.iter().filter(|r| r.pipeline == p).map(f).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let miso = mean(Pipeline::MisoDelaySum, &|r| r.stoi_mono);
    let siso_w = mean(Pipeline::SisoPerChannel, &|r| r.stoi_w().unwrap());
    let margin = miso - siso_w;

    let rate = 16_000;
    let (s, _) = speech_like(10.0, rate, 55);
    let mut gains = Vec::new();
    for m in [2usize, 4] {
        let noises: Vec<Vec<f64>> = (0..m).map(|c| white_noise(s.len(), 0.05, 600 + c as u64)).collect();
        let channels: Vec<AudioBuffer<f64>> = noises
            .iter()
            .map(|n| buf(s.iter().zip(n).map(|(a, b)| a + b).collect(), rate))
            .collect();
        let a = ncc_align(&channels, &BeamformerParams::default()).unwrap();
        let out = delay_sum_beamform(&channels, &a.delays).unwrap();
        let residual: Vec<f64> = out.samples().iter().zip(&s).map(|(o, c)| o - c).collect();
        let gain = 10.0 * (energy(&noises[0]) / energy(&residual)).log10();
        gains.push((m, gain, (gain - 10.0 * (m as f64).log10()).abs()));
    }
    let gains_ok = gains.iter().all(|g| g.2 <= ARRAY_GAIN_TOL_DB);
    outcome(
        margin > 0.0 && gains_ok,
        format!(
            "mean stoi miso {miso:.4} vs siso W {siso_w:.4} (margin {margin:+.4}); gain M=2 {:.2} dB, M=4 {:.2} dB",
            gains[0].1, gains[1].1
        ),
    )
}

fn stoi_noise(kind: usize, len: usize, rate: u32, seed: u64) -> Vec<f64> {
    match kind {
        0 => white_noise(len, 1.0, seed),
        1 => {
            let mut acc = 0.0;
            white_noise(len, 1.0, seed)
                .into_iter()
                .map(|v| {
                    acc = 0.98 * acc + v;
                    acc
                })
                .collect()
        }
        2 => {
            let mut out = vec![0.0; len];
            for k in 0..5 {
                let (t, _) = speech_like(len as f64 / rate as f64 + 0.01, rate, seed * 7 + k);
                out.iter_mut().zip(t).for_each(|(o, v)| *o += v);
            }
            out
        }
        _ => (0..len)
            .map(|i| {
                let t = i as f64 / rate as f64;
                (1..6).map(|h| (2.0 * std::f64::consts::PI * 120.0 * h as f64 * t).sin() / h as f64).sum()
            })
            .collect(),
    }
}

fn stoi_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..20usize {
        let rate = if k % 2 == 0 { 10_000 } else { 16_000 };
        let (clean, _) = speech_like(2.5, rate, 700 + k as u64);
        let degraded: Vec<f64> = if k >= 16 {
            let taps: Vec<f64> = uniform(2000, 50 + k as u64)
                .iter()
                .enumerate()
                .map(|(i, v)| if i == 0 { 1.0 } else { 0.3 * v * (-(i as f64) / 300.0).exp() })
                .collect();
            fft_convolve_taps(&clean, &taps).unwrap()[..clean.len()].to_vec()
        } else {
            let noise = stoi_noise(k / 4, clean.len(), rate, 1000 + k as u64);
            let noise = scale_to_snr(&clean, &noise, [-5.0, 0.0, 5.0, 10.0, 20.0][k % 5]);
            clean.iter().zip(&noise).map(|(a, b)| a + b).collect()
        };
        let got = stoi(&buf(clean.clone(), rate), &buf(degraded.clone(), rate)).unwrap().value();
        worst = worst.max((got - reference_stoi(&clean, &degraded, rate)).abs());
    }

    let mut self_dev = 0.0f64;
    for (seed, rate) in [(1u64, 10_000), (2, 16_000), (3, 48_000)] {
        let (x, _) = speech_like(2.0, rate, seed);
        let s = stoi(&buf(x.clone(), rate), &buf(x, rate)).unwrap().value();
        self_dev = self_dev.max((s - 1.0).abs());
    }

    let (clean, _) = speech_like(3.0, 16_000, 77);
    let raw = white_noise(clean.len(), 1.0, 78);
    let scores: Vec<f64> = [-5.0, 0.0, 5.0, 10.0, 20.0]
        .iter()
        .map(|&snr| {
            let noise = scale_to_snr(&clean, &raw, snr);
            let y = clean.iter().zip(&noise).map(|(a, b)| a + b).collect();
            stoi(&buf(clean.clone(), 16_000), &buf(y, 16_000)).unwrap().value()
        })
        .collect();
    let monotone = scores.windows(2).all(|w| w[1] > w[0]);
    let t = start.elapsed();
    outcome(
        worst <= STOI_ORACLE_TOL && self_dev <= STOI_SELF_TOL && monotone && t < TWO_MINUTES,
        format!(
            "max |stoi - reference| {worst:.2e} on 20 fixtures, |stoi(x,x) - 1| {self_dev:.1e}, scores over snr {:?}, {:.1} s",
            scores.iter().map(|s| (s * 1e4).round() / 1e4).collect::<Vec<_>>(),
            t.as_secs_f64()
        ),
    )
}

fn delayed(x: &[f64], d: usize) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    y[d..].copy_from_slice(&x[..x.len() - d]);
    y
}

fn numeric_oracles() -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let mut conv = 0.0f64;
    for k in 0..1000u64 {
        let la = r.random_range(1..=2048);
        let lb = r.random_range(1..=2048);
        let a = uniform(la, 2 * k);
        let b = uniform(lb, 2 * k + 1);
        conv = conv.max(relative_l2(&fft_convolve_taps(&a, &b).unwrap(), &direct_convolve(&a, &b)));
    }

    let mut round = 0.0f64;
    for (k, (n, hop, w)) in [
        (512, 256, Window::SqrtHann),
        (512, 128, Window::Hann),
        (256, 64, Window::Hann),
        (1024, 512, Window::SqrtHann),
        (64, 64, Window::Rectangular),
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = StftConfig::new(n, hop, w).unwrap();
        let x = white_noise(16_000 + 37 * k, 1.0, 60 + k as u64);
        let y = istft(&stft(&buf(x.clone(), 16_000), &cfg).unwrap()).unwrap();
        round = round.max(relative_l2(y.samples(), &x));
    }

    let a = white_noise(8000, 1.0, 8);
    let mut lags_exact = true;
    for d in [0usize, 1, 3, 8, 17, 31] {
        let b = delayed(&a, d);
        let g = gcc_phat(&buf(a.clone(), 16_000), &buf(b.clone(), 16_000), 0.002).unwrap();
        let back = gcc_phat(&buf(b, 16_000), &buf(a.clone(), 16_000), 0.002).unwrap();
        lags_exact &= g.lag_samples == d as isize && back.lag_samples == -(d as isize);
        lags_exact &= (g.tdoa_s * 16_000.0).round() == d as f64;
    }

    let tdoa = 0.2 / SPEED_OF_SOUND_M_S;
    let x = white_noise(4096, 1.0, 10);
    let y = fractional_delay_circular(&x, tdoa * 16_000.0);
    let g = gcc_phat(&buf(x, 16_000), &buf(y, 16_000), 0.002).unwrap();
    let endfire_err = (g.tdoa_s - tdoa).abs();
    let t = start.elapsed();
    outcome(
        conv <= CONV_REL_TOL && round <= STFT_REL_TOL && lags_exact && endfire_err <= 1.0 / 16_000.0 && t < TWO_MINUTES,
        format!(
            "conv max rel {conv:.1e} (1000 cases), stft round trip {round:.1e}, integer lags exact: {lags_exact}, \
             endfire {:.1} µs vs {:.1} µs, {:.1} s",
            g.tdoa_s * 1e6,
            tdoa * 1e6,
            t.as_secs_f64()
        ),
    )
}

fn angular_arithmetic() -> Outcome {
    let d = |az, el| Direction::new(az, el).unwrap();
    let e = angular_error(&d(153.10, 12.71), &d(153.58, 12.46));
    let w = angular_error(&d(179.0, 0.0), &d(-179.0, 0.0));
    let pass = (e.d_azimuth_deg + 0.48).abs() < ANGLE_TOL_DEG
        && (e.d_elevation_deg - 0.25).abs() < ANGLE_TOL_DEG
        && (w.d_azimuth_deg + 2.0).abs() < ANGLE_TOL_DEG;
    outcome(
        pass,
        format!(
            "({:+.6}°, {:+.6}°), wrap {:+.6}°",
            e.d_azimuth_deg, e.d_elevation_deg, w.d_azimuth_deg
        ),
    )
}

fn determinism_and_fail_soft() -> Outcome {
    let suite = SynthSection {
        directions: 5,
        snrs_db: vec![0.0, 10.0],
        ..SynthSection::default()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = to_json(&eval_suite(a.path(), &suite, 42).without_timestamp()).unwrap();
    let rb = to_json(&eval_suite(b.path(), &suite, 42).without_timestamp()).unwrap();
    let identical = ra == rb;

    let victim = a.path().join("fx0006_mic_b.wav");
    std::fs::write(&victim, b"not a wav").unwrap();
    let out = a.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_sebench"))
        .args(["eval", "--manifest"])
        .arg(a.path().join("manifest.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status
        .code();
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let scored = report["entries_processed"].as_u64();
    outcome(
        identical && status == Some(2) && scored == Some(9),
        format!("identical reports: {identical}; corrupt batch exit {status:?}, {scored:?} of 10 scored"),
    )
}

fn main() {
    let suite_dir = tempfile::tempdir().unwrap();
    let suite = eval_suite(suite_dir.path(), &SynthSection::default(), 0);

    let checks: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("icpd preservation", Box::new(icpd_preservation)),
        ("doa preservation", Box::new(doa_preservation)),
        ("miso spatial collapse", Box::new(|| miso_collapse(&suite))),
        ("array-gain ordering", Box::new(|| array_gain(&suite))),
        ("stoi oracle equivalence", Box::new(stoi_equivalence)),
        ("numeric oracles", Box::new(numeric_oracles)),
        ("angular arithmetic", Box::new(angular_arithmetic)),
        ("harness determinism and fail-soft", Box::new(determinism_and_fail_soft)),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
