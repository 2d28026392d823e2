use std::str::FromStr;

use crate::dsp::{istft, stft, AudioBuffer, Spectrogram, StftConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scene::{BFormatScene, W};

const MIN_NOISE_FRAMES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskParams {
    /// Quantile of per-bin power across frames taken as the noise floor.
    pub noise_percentile: f64,
    pub floor_gain: f64,
    pub oversubtraction: f64,
    /// Radius of the centred moving average over frames; 0 disables it.
    pub smoothing_frames: usize,
}

impl Default for MaskParams {
    fn default() -> Self {
        Self {
            noise_percentile: 0.2,
            floor_gain: 0.05,
            oversubtraction: 1.5,
            smoothing_frames: 2,
        }
    }
}

impl MaskParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_percentile > 0.0 && self.noise_percentile < 1.0) {
            return Err(Error::InvalidParam(format!(
                "noise_percentile {} outside (0, 1)",
                self.noise_percentile
            )));
        }
        if !(0.0..=1.0).contains(&self.floor_gain) {
            return Err(Error::InvalidParam(format!(
                "floor_gain {} outside [0, 1]",
                self.floor_gain
            )));
        }
        if !(self.oversubtraction >= 1.0) || !self.oversubtraction.is_finite() {
            return Err(Error::InvalidParam(format!(
                "oversubtraction {} below 1",
                self.oversubtraction
            )));
        }
        Ok(())
    }
}

/// Real gains in `[floor_gain, 1]`, row-major `[frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMask<T = f64> {
    gains: Vec<T>,
    frames: usize,
    bins: usize,
}

impl<T: Real> GainMask<T> {
    pub fn ones(frames: usize, bins: usize) -> Self {
        Self {
            gains: vec![T::one(); frames * bins],
            frames,
            bins,
        }
    }

    pub fn gains(&self) -> &[T] {
        &self.gains
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn get(&self, tau: usize, bin: usize) -> T {
        self.gains[tau * self.bins + bin]
    }
}

/// Linear-interpolated quantile of a sorted slice.
fn quantile_sorted<T: Real>(sorted: &[T], q: f64) -> T {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = T::lit(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Per-bin noise power: the `noise_percentile` quantile of `|Y(τ, f)|²`
/// over frames.
pub fn estimate_noise_psd<T: Real>(spec: &Spectrogram<T>, params: &MaskParams) -> Result<Vec<T>> {
    params.validate()?;
    if spec.frames() < MIN_NOISE_FRAMES {
        return Err(Error::TooFewFrames {
            needed: MIN_NOISE_FRAMES,
            got: spec.frames(),
        });
    }
    let mut column = vec![T::zero(); spec.frames()];
    Ok((0..spec.bins())
        .map(|bin| {
            for (tau, slot) in column.iter_mut().enumerate() {
                *slot = spec.get(tau, bin).norm_sqr();
            }
            column.sort_by(|a, b| a.partial_cmp(b).expect("finite power"));
            quantile_sorted(&column, params.noise_percentile)
        })
        .collect())
}

/// Spectral-subtraction gain `max(0, 1 - α·N(f)/|Y|²)`, clamped to
/// `[floor_gain, 1]` and then averaged over `±smoothing_frames` frames.
///
/// A bin with zero noise power gets gain 1 even when `|Y| = 0`.
pub fn compute_mask<T: Real>(
    spec: &Spectrogram<T>,
    noise_psd: &[T],
    params: &MaskParams,
) -> Result<GainMask<T>> {
    params.validate()?;
    let bins = spec.bins();
    if noise_psd.len() != bins {
        return Err(Error::LengthMismatch(noise_psd.len(), bins));
    }
    let frames = spec.frames();
    let alpha = T::lit(params.oversubtraction);
    let floor = T::lit(params.floor_gain);
    let raw: Vec<T> = spec
        .data()
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let noise = noise_psd[i % bins];
            let power = y.norm_sqr();
            let g = if noise == T::zero() {
                T::one()
            } else if power == T::zero() {
                T::zero()
            } else {
                (T::one() - alpha * noise / power).max(T::zero())
            };
            g.max(floor).min(T::one())
        })
        .collect();

    let radius = params.smoothing_frames;
    if radius == 0 || frames == 0 {
        return Ok(GainMask {
            gains: raw,
            frames,
            bins,
        });
    }
    let mut gains = vec![T::zero(); raw.len()];
    for tau in 0..frames {
        let lo = tau.saturating_sub(radius);
        let hi = (tau + radius).min(frames - 1);
        let count = T::from_usize_lossy(hi - lo + 1);
        for bin in 0..bins {
            let sum: T = (lo..=hi).map(|t| raw[t * bins + bin]).sum();
            // Averaging can drift past the clamp by an ulp.
            gains[tau * bins + bin] = (sum / count).max(floor).min(T::one());
        }
    }
    Ok(GainMask {
        gains,
        frames,
        bins,
    })
}

/// `X̂ = G · Y`: magnitudes scaled by a non-negative real gain, phase kept.
pub fn apply_mask<T: Real>(spec: &Spectrogram<T>, mask: &GainMask<T>) -> Result<Spectrogram<T>> {
    if mask.frames != spec.frames() || mask.bins != spec.bins() {
        return Err(Error::LengthMismatch(
            mask.gains.len(),
            spec.frames() * spec.bins(),
        ));
    }
    spec.with_data(
        spec.data()
            .iter()
            .zip(&mask.gains)
            .map(|(y, &g)| y.scale(g))
            .collect(),
    )
}

#[derive(Debug, Clone)]
pub struct SisoEnhancement<T = f64> {
    pub output: AudioBuffer<T>,
    /// STFT of the input, `Y(τ, f)`.
    pub noisy: Spectrogram<T>,
    /// Masked spectrogram handed to the inverse STFT, `X̂(τ, f)`.
    pub enhanced: Spectrogram<T>,
    pub mask: GainMask<T>,
}

fn finish<T: Real>(noisy: Spectrogram<T>, mask: GainMask<T>) -> Result<SisoEnhancement<T>> {
    let enhanced = apply_mask(&noisy, &mask)?;
    let output = istft(&enhanced)?;
    Ok(SisoEnhancement {
        output,
        noisy,
        enhanced,
        mask,
    })
}

/// Enhancement with a caller-supplied noise power spectrum.
pub fn enhance_siso_with_noise<T: Real>(
    signal: &AudioBuffer<T>,
    noise_psd: &[T],
    params: &MaskParams,
    config: &StftConfig,
) -> Result<SisoEnhancement<T>> {
    let noisy = stft(signal, config)?;
    let mask = compute_mask(&noisy, noise_psd, params)?;
    finish(noisy, mask)
}

pub fn enhance_siso_detailed<T: Real>(
    signal: &AudioBuffer<T>,
    params: &MaskParams,
    config: &StftConfig,
) -> Result<SisoEnhancement<T>> {
    let noisy = stft(signal, config)?;
    let psd = estimate_noise_psd(&noisy, params)?;
    let mask = compute_mask(&noisy, &psd, params)?;
    finish(noisy, mask)
}

/// Single-channel enhancement; output length equals input length.
pub fn enhance_siso<T: Real>(
    signal: &AudioBuffer<T>,
    params: &MaskParams,
    config: &StftConfig,
) -> Result<AudioBuffer<T>> {
    Ok(enhance_siso_detailed(signal, params, config)?.output)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChannelMode {
    /// Each channel estimates and applies its own mask.
    #[default]
    PerChannel,
    /// The W-channel mask is applied to all four channels.
    SharedMask,
}

impl FromStr for ChannelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-channel" => Ok(Self::PerChannel),
            "shared-mask" => Ok(Self::SharedMask),
            other => Err(Error::InvalidParam(format!("unknown channel mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultichannelEnhancement<T = f64> {
    pub scene: BFormatScene<T>,
    pub noisy: [Spectrogram<T>; 4],
    pub enhanced: [Spectrogram<T>; 4],
}

pub fn enhance_multichannel_detailed<T: Real>(
    scene: &BFormatScene<T>,
    mode: ChannelMode,
    params: &MaskParams,
    config: &StftConfig,
) -> Result<MultichannelEnhancement<T>> {
    let results: Vec<SisoEnhancement<T>> = match mode {
        ChannelMode::PerChannel => scene
            .channels()
            .iter()
            .map(|c| enhance_siso_detailed(c, params, config))
            .collect::<Result<_>>()?,
        ChannelMode::SharedMask => {
            let reference = enhance_siso_detailed(&scene.channels()[W], params, config)?;
            let mask = reference.mask;
            scene
                .channels()
                .iter()
                .map(|c| finish(stft(c, config)?, mask.clone()))
                .collect::<Result<_>>()?
        }
    };
    let mut outputs = Vec::with_capacity(4);
    let mut noisy = Vec::with_capacity(4);
    let mut enhanced = Vec::with_capacity(4);
    for r in results {
        outputs.push(r.output);
        noisy.push(r.noisy);
        enhanced.push(r.enhanced);
    }
    Ok(MultichannelEnhancement {
        scene: BFormatScene::from_vec(outputs)?,
        noisy: noisy.try_into().expect("four channels"),
        enhanced: enhanced.try_into().expect("four channels"),
    })
}

pub fn enhance_multichannel<T: Real>(
    scene: &BFormatScene<T>,
    mode: ChannelMode,
    params: &MaskParams,
    config: &StftConfig,
) -> Result<BFormatScene<T>> {
    Ok(enhance_multichannel_detailed(scene, mode, params, config)?.scene)
}
