use std::f64::consts::PI;

use crate::dsp::{stft, Spectrogram, StftConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scene::BFormatScene;

pub const DEFAULT_FLOOR_DBFS: f64 = -80.0;

/// RMS inter-channel level and phase deviation over all channel pairs and
/// active bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialDeviation {
    pub icld_rms_db: f64,
    pub icpd_rms_rad: f64,
    pub active_bin_count: usize,
}

/// Bin level relative to a full-scale sinusoid centred on that bin.
pub fn bin_level_dbfs(magnitude: f64, config: &StftConfig) -> f64 {
    let window_sum: f64 = config.window().coefficients::<f64>(config.fft_size()).iter().sum();
    20.0 * (2.0 * magnitude / window_sum).log10()
}

fn wrap_phase(p: f64) -> f64 {
    let w = p - 2.0 * PI * ((p + PI) / (2.0 * PI)).floor();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Deviation of ICLD/ICPD from `before` to `after`, computed directly on
/// four-channel spectrograms. A time-frequency bin is active when all eight
/// magnitudes (four channels, both versions) exceed `floor_dbfs`.
pub fn spatial_deviation<T: Real>(
    before: &[Spectrogram<T>; 4],
    after: &[Spectrogram<T>; 4],
    floor_dbfs: f64,
) -> Result<SpatialDeviation> {
    let reference = &before[0];
    for s in before.iter().chain(after) {
        if !s.same_shape(reference) {
            return Err(Error::LengthMismatch(s.frames(), reference.frames()));
        }
    }
    let config = reference.config();
    let window_sum: f64 = config.window().coefficients::<f64>(config.fft_size()).iter().sum();
    // |Y| threshold equivalent to floor_dbfs.
    let min_mag = 10f64.powf(floor_dbfs / 20.0) * window_sum / 2.0;

    let mut level_sq = 0.0;
    let mut phase_sq = 0.0;
    let mut active = 0usize;
    let mut pair_terms = 0usize;
    for tau in 0..reference.frames() {
        for bin in 0..reference.bins() {
            let b: [(f64, f64); 4] = std::array::from_fn(|c| {
                let v = before[c].get(tau, bin);
                (v.norm().as_f64(), v.arg().as_f64())
            });
            let a: [(f64, f64); 4] = std::array::from_fn(|c| {
                let v = after[c].get(tau, bin);
                (v.norm().as_f64(), v.arg().as_f64())
            });
            if b.iter().chain(&a).any(|&(m, _)| !(m > min_mag)) {
                continue;
            }
            active += 1;
            for i in 0..4 {
                for j in i + 1..4 {
                    let icld_in = 20.0 * (b[i].0 / b[j].0).log10();
                    let icld_out = 20.0 * (a[i].0 / a[j].0).log10();
                    let icpd_in = b[i].1 - b[j].1;
                    let icpd_out = a[i].1 - a[j].1;
                    level_sq += (icld_out - icld_in).powi(2);
                    phase_sq += wrap_phase(icpd_out - icpd_in).powi(2);
                    pair_terms += 1;
                }
            }
        }
    }
    if active == 0 {
        return Err(Error::NoActiveBins);
    }
    Ok(SpatialDeviation {
        icld_rms_db: (level_sq / pair_terms as f64).sqrt(),
        icpd_rms_rad: (phase_sq / pair_terms as f64).sqrt(),
        active_bin_count: active,
    })
}

/// Re-analyses both scenes with `config` and compares their ICLD/ICPD.
pub fn icld_icpd_deviation<T: Real>(
    before: &BFormatScene<T>,
    after: &BFormatScene<T>,
    config: &StftConfig,
    floor_dbfs: f64,
) -> Result<SpatialDeviation> {
    if before.sample_rate_hz() != after.sample_rate_hz() {
        return Err(Error::RateMismatch(
            before.sample_rate_hz(),
            after.sample_rate_hz(),
        ));
    }
    if before.len() != after.len() {
        return Err(Error::LengthMismatch(before.len(), after.len()));
    }
    let analyse = |s: &BFormatScene<T>| -> Result<[Spectrogram<T>; 4]> {
        let [w, x, y, z] = s.channels();
        Ok([stft(w, config)?, stft(x, config)?, stft(y, config)?, stft(z, config)?])
    };
    spatial_deviation(&analyse(before)?, &analyse(after)?, floor_dbfs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_into_half_open_interval() {
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(0.25), 0.25);
    }

    #[test]
    fn full_scale_bin_centred_tone_is_zero_dbfs() {
        use crate::dsp::AudioBuffer;
        let cfg = StftConfig::default();
        let k = 32usize;
        let x: Vec<f64> = (0..4096)
            .map(|i| (2.0 * PI * k as f64 * i as f64 / 512.0).cos())
            .collect();
        let spec = stft(&AudioBuffer::new(x, 16_000).unwrap(), &cfg).unwrap();
        let level = bin_level_dbfs(spec.get(5, k).norm(), &cfg);
        assert!(level.abs() < 1e-2, "{level}");
    }
}
