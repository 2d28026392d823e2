//! Seeded synthetic scenes: a speech-like source at a random direction,
//! exponential-decay B-format RIRs for Mic A and a displaced Mic B, and
//! independent noise on every channel.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use sebench_core::dsp::{write_wav, AudioBuffer, BitDepth};
use sebench_core::scene::{
    apply_rir, mix_scene, noise_gain_for_snr, BFormatScene, Direction, RirSet, DEFAULT_W_GAIN,
};

use crate::config::{NoiseKind, SynthSection};
use crate::manifest::{EntryMeta, ManifestEntry};
use crate::HarnessError;

/// Geometric origin of every RIR, leaving room for Mic B arrivals that
/// precede Mic A.
const RIR_ONSET: usize = 24;
const SINC_HALF_WIDTH: isize = 16;
const PEAK_LIMIT: f64 = 0.95;

/// One synthesized entry, before quantization.
#[derive(Debug, Clone)]
pub struct SynthScene {
    pub id: String,
    pub direction: Direction,
    pub snr_db: f64,
    pub noise: NoiseKind,
    pub target: AudioBuffer<f64>,
    /// Reverberant speech at Mic A, before noise.
    pub clean_a: BFormatScene<f64>,
    /// Noise at Mic A after SNR scaling.
    pub noise_a: BFormatScene<f64>,
    pub mic_a: BFormatScene<f64>,
    pub mic_b: BFormatScene<f64>,
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn gauss(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Syllables of harmonic or fricative bursts under raised-cosine envelopes,
/// separated by pauses. Peak 0.5.
pub fn speech_like(len: usize, rate_hz: u32, r: &mut ChaCha8Rng) -> Vec<f64> {
    let fs = rate_hz as f64;
    let mut out = vec![0.0; len];
    let mut t = (r.random_range(0.05..0.2) * fs) as usize;
    while t < len {
        let end = (t + (r.random_range(0.1..0.3) * fs) as usize).min(len);
        let level = r.random_range(0.3..1.0);
        if r.random_bool(0.75) {
            let f0 = r.random_range(90.0..240.0);
            let glide = r.random_range(-0.25..0.25);
            let formants = [r.random_range(300.0..900.0), r.random_range(900.0..2600.0), r.random_range(2400.0..3600.0)];
            let harmonics = ((0.45 * fs.min(8000.0)) / (f0 * 1.3)) as usize;
            let amps: Vec<f64> = (1..=harmonics)
                .map(|h| {
                    let f = f0 * h as f64;
                    formants.iter().enumerate().map(|(k, fc)| {
                        let bw = 90.0 * (k + 1) as f64;
                        (0.8f64).powi(k as i32) / (1.0 + ((f - fc) / bw).powi(2))
                    }).sum::<f64>() + 0.01
                })
                .collect();
            let phases: Vec<f64> = (0..harmonics).map(|_| r.random_range(0.0..2.0 * PI)).collect();
            let mut phase = 0.0;
            for (i, o) in out.iter_mut().enumerate().take(end).skip(t) {
                let u = (i - t) as f64 / (end - t) as f64;
                phase += 2.0 * PI * f0 * (1.0 + glide * u) / fs;
                let v: f64 = amps.iter().zip(&phases).enumerate()
                    .map(|(h, (a, p))| a * (phase * (h + 1) as f64 + p).sin())
                    .sum();
                *o = level * (PI * u).sin().powi(2) * v;
            }
        } else {
            let mut prev = 0.0;
            for (i, o) in out.iter_mut().enumerate().take(end).skip(t) {
                let u = (i - t) as f64 / (end - t) as f64;
                let n = gauss(r);
                *o = 0.3 * level * (PI * u).sin().powi(2) * (n - prev);
                prev = n;
            }
        }
        t = end + (r.random_range(0.04..0.2) * fs) as usize;
        if r.random_bool(0.2) {
            t += (r.random_range(0.2..0.5) * fs) as usize;
        }
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    out
}

fn noise_signal(kind: NoiseKind, len: usize, rate_hz: u32, r: &mut ChaCha8Rng) -> Vec<f64> {
    let fs = rate_hz as f64;
    match kind {
        NoiseKind::White => (0..len).map(|_| gauss(r)).collect(),
        NoiseKind::Babble => {
            let mut out = vec![0.0; len];
            for _ in 0..6 {
                let talker = speech_like(len, rate_hz, r);
                let shift = r.random_range(0..len);
                for (i, o) in out.iter_mut().enumerate() {
                    *o += talker[(i + shift) % len];
                }
            }
            out
        }
        NoiseKind::Tonal => {
            let tones: Vec<(f64, f64, f64)> = (0..r.random_range(3..6))
                .map(|_| (r.random_range(150.0..3000.0), r.random_range(0.3..1.0), r.random_range(0.0..2.0 * PI)))
                .collect();
            (0..len)
                .map(|i| {
                    let t = i as f64 / fs;
                    let hum: f64 = tones.iter().map(|(f, a, p)| a * (2.0 * PI * f * t + p).sin()).sum();
                    hum + 0.03 * gauss(r)
                })
                .collect()
        }
    }
}

fn random_direction(r: &mut ChaCha8Rng) -> Direction {
    let az = r.random_range(-180.0..180.0);
    let el = r.random_range(-1.0f64..1.0).asin().to_degrees();
    Direction::new(az, el).expect("in range")
}

/// Adds `gains · δ(t - delay)` to four tap vectors with a Hann-windowed
/// sinc for the fractional part.
fn add_arrival(taps: &mut [Vec<f64>; 4], delay: f64, gains: [f64; 4]) {
    let centre = delay.round() as isize;
    for k in -SINC_HALF_WIDTH..=SINC_HALF_WIDTH {
        let n = centre + k;
        if n < 0 || n as usize >= taps[0].len() {
            continue;
        }
        let d = n as f64 - delay;
        if d.abs() >= SINC_HALF_WIDTH as f64 {
            continue;
        }
        let sinc = if d == 0.0 { 1.0 } else { (PI * d).sin() / (PI * d) };
        let win = 0.5 + 0.5 * (PI * d / SINC_HALF_WIDTH as f64).cos();
        for (t, g) in taps.iter_mut().zip(gains) {
            t[n as usize] += g * sinc * win;
        }
    }
}

fn foa_gains(u: [f64; 3]) -> [f64; 4] {
    [DEFAULT_W_GAIN, u[0], u[1], u[2]]
}

/// RIR pair for a source at `dir`: a direct plane wave and a diffuse tail
/// of one random-direction reflection per sample, tail scaled so the W
/// channel of Mic A has the configured direct-to-reverberant ratio.
fn rir_pair(dir: &Direction, cfg: &SynthSection, r: &mut ChaCha8Rng) -> (RirSet<f64>, RirSet<f64>) {
    let fs = cfg.sample_rate_hz as f64;
    let len = RIR_ONSET + (1.2 * cfg.rt60_s * fs) as usize;
    let p = cfg.mic_b_offset_m;
    // A plane wave from u reaches a point p earlier by p·u / c.
    let lead = |u: [f64; 3]| (p[0] * u[0] + p[1] * u[1] + p[2] * u[2]) / cfg.speed_of_sound_m_s * fs;
    let zeros = || [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let (mut direct_a, mut direct_b) = (zeros(), zeros());
    let u = dir.unit_vector();
    add_arrival(&mut direct_a, RIR_ONSET as f64, foa_gains(u));
    add_arrival(&mut direct_b, RIR_ONSET as f64 - lead(u), foa_gains(u));

    let (mut tail_a, mut tail_b) = (zeros(), zeros());
    let first = RIR_ONSET + (0.002 * fs) as usize;
    for n in first..len {
        let t = (n - RIR_ONSET) as f64 / fs;
        let amp = gauss(r) * (-6.9 * t / cfg.rt60_s).exp();
        let v = [gauss(r), gauss(r), gauss(r)];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-12);
        let u = [v[0] / norm, v[1] / norm, v[2] / norm];
        let g = foa_gains(u).map(|x| x * amp);
        add_arrival(&mut tail_a, n as f64, g);
        add_arrival(&mut tail_b, n as f64 - lead(u), g);
    }
    let energy = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let scale = (energy(&direct_a[0]) / (energy(&tail_a[0]) * 10f64.powf(cfg.drr_db / 10.0))).sqrt();
    let combine = |d: [Vec<f64>; 4], t: [Vec<f64>; 4]| {
        let taps = d.into_iter().zip(t).map(|(d, t)| d.iter().zip(t).map(|(a, b)| a + scale * b).collect()).collect::<Vec<Vec<f64>>>();
        RirSet::new(taps.try_into().expect("four channels"), cfg.sample_rate_hz).expect("valid taps")
    };
    (combine(direct_a, tail_a), combine(direct_b, tail_b))
}

fn noise_scene(kind: NoiseKind, len: usize, rate: u32, r: &mut ChaCha8Rng) -> BFormatScene<f64> {
    let chans = (0..4)
        .map(|_| AudioBuffer::new(noise_signal(kind, len, rate, r), rate).expect("finite noise"))
        .collect();
    BFormatScene::from_vec(chans).expect("four channels")
}

pub fn entry_count(cfg: &SynthSection) -> usize {
    cfg.directions * cfg.snrs_db.len()
}

/// Entry `index` of the suite: direction `index / snrs`, SNR `index % snrs`,
/// noise kinds cycling over entries.
pub fn synth_scene(cfg: &SynthSection, seed: u64, index: usize) -> Result<SynthScene, HarnessError> {
    let rate = cfg.sample_rate_hz;
    let len = (cfg.duration_s * rate as f64).round() as usize;
    let d_index = index / cfg.snrs_db.len();
    let snr_db = cfg.snrs_db[index % cfg.snrs_db.len()];
    let noise = cfg.noise_kinds[index % cfg.noise_kinds.len()];

    // The source and room depend on the direction slot only.
    let mut room = stream(seed, 2 * d_index as u64);
    let direction = random_direction(&mut room);
    let target = AudioBuffer::new(speech_like(len, rate, &mut room), rate)?;
    let (rir_a, rir_b) = rir_pair(&direction, cfg, &mut room);
    let clean_a = apply_rir(&target, &rir_a)?.resized(len);
    let clean_b = apply_rir(&target, &rir_b)?.resized(len);

    let mut nr = stream(seed, 2 * index as u64 + 1);
    let raw_a = noise_scene(noise, len, rate, &mut nr);
    let raw_b = noise_scene(noise, len, rate, &mut nr);
    let gain = noise_gain_for_snr(&clean_a, &raw_a, snr_db)?;
    let noise_a = raw_a.scaled(gain)?;
    let mic_a = mix_scene(&clean_a, &raw_a, snr_db)?;
    let mic_b = BFormatScene::from_vec(
        clean_b
            .channels()
            .iter()
            .zip(raw_b.channels())
            .map(|(s, n)| {
                AudioBuffer::new(
                    s.samples().iter().zip(n.samples()).map(|(a, b)| a + gain * b).collect(),
                    rate,
                )
            })
            .collect::<Result<_, _>>()?,
    )?;

    // One common scale keeps both arrays inside 16-bit range without
    // touching the SNR.
    let peak = mic_a
        .channels()
        .iter()
        .chain(mic_b.channels())
        .flat_map(|c| c.samples())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let k = if peak > PEAK_LIMIT { PEAK_LIMIT / peak } else { 1.0 };
    Ok(SynthScene {
        id: format!("fx{index:04}"),
        direction,
        snr_db,
        noise,
        target,
        clean_a: clean_a.scaled(k)?,
        noise_a: noise_a.scaled(k)?,
        mic_a: mic_a.scaled(k)?,
        mic_b: mic_b.scaled(k)?,
    })
}

/// Writes the suite's WAVs (PCM16) and `manifest.json` into `out_dir`
/// and returns the manifest path. Same config and seed give identical
/// files.
pub fn synth_fixtures(out_dir: &Path, cfg: &SynthSection, seed: u64) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let entries: Vec<ManifestEntry> = (0..entry_count(cfg))
        .into_par_iter()
        .map(|i| {
            let s = synth_scene(cfg, seed, i)?;
            let names = [
                format!("{}_mic_a.wav", s.id),
                format!("{}_mic_b.wav", s.id),
                format!("{}_target.wav", s.id),
            ];
            write_wav(out_dir.join(&names[0]), s.mic_a.channels(), BitDepth::Pcm16)?;
            write_wav(out_dir.join(&names[1]), s.mic_b.channels(), BitDepth::Pcm16)?;
            write_wav(out_dir.join(&names[2]), std::slice::from_ref(&s.target), BitDepth::Pcm16)?;
            Ok(ManifestEntry {
                id: s.id,
                mic_a: names[0].clone().into(),
                mic_b: Some(names[1].clone().into()),
                target: names[2].clone().into(),
                doa_xyz: Some(s.direction.unit_vector()),
                doa_sph: None,
                meta: Some(EntryMeta {
                    snr_db: Some(s.snr_db),
                    noise: Some(s.noise.as_str().to_string()),
                }),
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&entries)?;
    std::fs::write(&path, text + "\n").map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}
