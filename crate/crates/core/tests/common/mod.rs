#![allow(dead_code)]

use sebench_core::dsp::AudioBuffer;
use sebench_core::scene::{encode_plane_wave, BFormatScene, Direction, DEFAULT_W_GAIN};
use sebench_oracles::fixtures::{speech_like, white_noise};

pub fn buf(x: Vec<f64>, rate: u32) -> AudioBuffer<f64> {
    AudioBuffer::new(x, rate).unwrap()
}

pub fn dir(az: f64, el: f64) -> Direction {
    Direction::new(az, el).unwrap()
}

pub fn speech(duration_s: f64, rate: u32, seed: u64) -> AudioBuffer<f64> {
    buf(speech_like(duration_s, rate, seed).0, rate)
}

/// Plane wave from `d` plus independent white noise on each channel, with
/// the W-channel SNR set to `snr_db`.
pub fn plane_wave_with_noise(s: &AudioBuffer<f64>, d: &Direction, snr_db: f64, seed: u64) -> BFormatScene<f64> {
    let clean = encode_plane_wave(s, d, DEFAULT_W_GAIN).unwrap();
    let noise: Vec<AudioBuffer<f64>> = (0..4)
        .map(|c| buf(white_noise(s.len(), 1.0, seed * 10 + c), s.sample_rate_hz()))
        .collect();
    let noise = BFormatScene::from_vec(noise).unwrap();
    sebench_core::scene::mix_scene(&clean, &noise, snr_db).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
