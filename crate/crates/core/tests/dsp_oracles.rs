mod common;

use common::{buf, max_abs_diff};
use proptest::prelude::*;
use sebench_core::dsp::{fft_convolve, fft_convolve_taps, istft, resample, stft, StftConfig, Window};
use sebench_oracles::fixtures::{uniform, white_noise};
use sebench_oracles::{direct_convolve, naive_rdft, relative_l2};

#[test]
fn convolution_small_case_matches_direct() {
    let got = fft_convolve_taps(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
    assert_eq!(direct_convolve(&[1.0, 2.0], &[3.0, 4.0]), vec![3.0, 10.0, 8.0]);
    assert!(max_abs_diff(&got, &[3.0, 10.0, 8.0]) < 1e-12);
}

#[test]
fn convolution_1000_by_257() {
    let a = uniform(1000, 1);
    let b = uniform(257, 2);
    let got = fft_convolve(&buf(a.clone(), 16_000), &b).unwrap();
    assert_eq!(got.len(), 1256);
    assert!(relative_l2(got.samples(), &direct_convolve(&a, &b)) < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_equals_direct(la in 1usize..2048, lb in 1usize..512, seed in any::<u64>()) {
        let a = uniform(la, seed);
        let b = uniform(lb, seed ^ 0x5555);
        let got = fft_convolve_taps(&a, &b).unwrap();
        prop_assert!(relative_l2(&got, &direct_convolve(&a, &b)) < 1e-9);
    }

    #[test]
    fn stft_round_trip(
        fft_pow in 3u32..9,
        hop_frac in 0.05f64..1.0,
        window in prop_oneof![Just(Window::Rectangular), Just(Window::Hann), Just(Window::SqrtHann)],
        len_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let n = 1usize << fft_pow;
        let hop = ((n as f64 * hop_frac).ceil() as usize).clamp(1, n);
        let config = StftConfig::new(n, hop, window);
        prop_assume!(config.is_ok());
        let config = config.unwrap();
        let len = 1 + (len_frac * (5 * n - 1) as f64) as usize;
        let x = white_noise(len, 1.0, seed);
        let back = istft(&stft(&buf(x.clone(), 16_000), &config).unwrap()).unwrap();
        prop_assert_eq!(back.len(), len);
        prop_assert!(max_abs_diff(back.samples(), &x) < 1e-9);
    }
}

#[test]
fn one_second_white_noise_round_trip_hann() {
    let x = white_noise(16_000, 0.3, 7);
    let config = StftConfig::new(512, 256, Window::Hann).unwrap();
    let back = istft(&stft(&buf(x.clone(), 16_000), &config).unwrap()).unwrap();
    assert!(max_abs_diff(back.samples(), &x) < 1e-10);
}

#[test]
fn parseval_per_frame_rectangular() {
    let n = 256;
    let x = white_noise(10 * n, 1.0, 11);
    let config = StftConfig::new(n, n, Window::Rectangular).unwrap();
    let spec = stft(&buf(x.clone(), 16_000), &config).unwrap();
    // Rebuild each frame's samples with the framing policy: reflect by n/2.
    let pad = n / 2;
    let padded: Vec<f64> = (0..spec.frames() * n)
        .map(|p| {
            let i = p as isize - pad as isize;
            if i < 0 {
                x[(-i) as usize]
            } else if (i as usize) < x.len() {
                x[i as usize]
            } else if (i as usize) < x.len() + pad {
                x[2 * (x.len() - 1) - i as usize]
            } else {
                0.0
            }
        })
        .collect();
    for tau in 0..spec.frames() {
        let frame = &padded[tau * n..(tau + 1) * n];
        let time_energy: f64 = frame.iter().map(|v| v * v).sum();
        let bins = spec.frame(tau);
        let mut spec_energy = bins[0].norm_sqr() + bins[n / 2].norm_sqr();
        spec_energy += 2.0 * bins[1..n / 2].iter().map(|c| c.norm_sqr()).sum::<f64>();
        spec_energy /= n as f64;
        assert!((spec_energy - time_energy).abs() <= 1e-6 * time_energy, "frame {tau}");
        // The FFT itself against a naive DFT on one frame.
        if tau == 3 {
            let naive = naive_rdft(frame, n);
            for (c, (re, im)) in bins.iter().zip(naive) {
                assert!((c.re - re).abs() < 1e-9 && (c.im - im).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn resample_round_trip_of_band_limited_signal() {
    // Tones below 0.4 of the lower rate.
    let tones = [(230.0, 0.4), (1170.0, 0.3), (2650.0, 0.2), (3700.0, 0.1)];
    let x: Vec<f64> = (0..32_000)
        .map(|i| {
            let t = i as f64 / 16_000.0;
            tones
                .iter()
                .map(|(f, a)| a * (2.0 * std::f64::consts::PI * f * t + f / 1000.0).sin())
                .sum()
        })
        .collect();
    let down = resample(&buf(x.clone(), 16_000), 10_000).unwrap();
    let back = resample(&down, 16_000).unwrap();
    assert_eq!(back.len(), x.len());
    let edge = 800;
    let err = relative_l2(&back.samples()[edge..x.len() - edge], &x[edge..x.len() - edge]);
    assert!(err < 0.01, "{err}");
}
