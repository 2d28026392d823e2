//! Run configuration. Every field is optional in the JSON document.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use sebench_core::dsp::{StftConfig, Window};
use sebench_core::enhance::{BeamformerParams, MaskParams};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    NoisyBaseline,
    SisoPerChannel,
    SisoSharedMask,
    MisoDelaySum,
}

impl Pipeline {
    pub const ALL: [Pipeline; 4] = [
        Pipeline::NoisyBaseline,
        Pipeline::SisoPerChannel,
        Pipeline::SisoSharedMask,
        Pipeline::MisoDelaySum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pipeline::NoisyBaseline => "noisy-baseline",
            Pipeline::SisoPerChannel => "siso-per-channel",
            Pipeline::SisoSharedMask => "siso-shared-mask",
            Pipeline::MisoDelaySum => "miso-delay-sum",
        }
    }

    /// Whether the pipeline produces a four-channel scene (and hence a DOA).
    pub fn outputs_scene(self) -> bool {
        !matches!(self, Pipeline::MisoDelaySum)
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pipeline {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown pipeline `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowName {
    Rectangular,
    Hann,
    SqrtHann,
}

impl From<WindowName> for Window {
    fn from(w: WindowName) -> Self {
        match w {
            WindowName::Rectangular => Window::Rectangular,
            WindowName::Hann => Window::Hann,
            WindowName::SqrtHann => Window::SqrtHann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StftSection {
    pub fft_size: usize,
    pub hop_size: usize,
    pub window: WindowName,
}

impl Default for StftSection {
    fn default() -> Self {
        Self {
            fft_size: 512,
            hop_size: 256,
            window: WindowName::SqrtHann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskSection {
    pub noise_percentile: f64,
    pub floor_gain: f64,
    pub oversubtraction: f64,
    pub smoothing_frames: usize,
}

impl Default for MaskSection {
    fn default() -> Self {
        let p = MaskParams::default();
        Self {
            noise_percentile: p.noise_percentile,
            floor_gain: p.floor_gain,
            oversubtraction: p.oversubtraction,
            smoothing_frames: p.smoothing_frames,
        }
    }
}

impl From<MaskSection> for MaskParams {
    fn from(m: MaskSection) -> Self {
        MaskParams {
            noise_percentile: m.noise_percentile,
            floor_gain: m.floor_gain,
            oversubtraction: m.oversubtraction,
            smoothing_frames: m.smoothing_frames,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamformerSection {
    pub window_ms: f64,
    pub max_lag_samples: usize,
    pub ref_channel: usize,
    /// Run the single-channel mask on the beamformer output.
    pub postfilter: bool,
}

impl Default for BeamformerSection {
    fn default() -> Self {
        let p = BeamformerParams::default();
        Self {
            window_ms: p.window_ms,
            max_lag_samples: p.max_lag_samples,
            ref_channel: p.ref_channel,
            postfilter: true,
        }
    }
}

impl From<BeamformerSection> for BeamformerParams {
    fn from(b: BeamformerSection) -> Self {
        BeamformerParams {
            window_ms: b.window_ms,
            max_lag_samples: b.max_lag_samples,
            ref_channel: b.ref_channel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    White,
    Babble,
    Tonal,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::White => "white",
            NoiseKind::Babble => "babble",
            NoiseKind::Tonal => "tonal",
        }
    }
}

/// Fixture synthesis settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub directions: usize,
    pub snrs_db: Vec<f64>,
    pub noise_kinds: Vec<NoiseKind>,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
    pub rt60_s: f64,
    pub drr_db: f64,
    /// Mic B position relative to Mic A, metres.
    pub mic_b_offset_m: [f64; 3],
    pub speed_of_sound_m_s: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            directions: 4,
            snrs_db: vec![0.0, 5.0, 10.0],
            noise_kinds: vec![NoiseKind::White, NoiseKind::Babble, NoiseKind::Tonal],
            duration_s: 3.0,
            sample_rate_hz: 16_000,
            rt60_s: 0.3,
            drr_db: 10.0,
            mic_b_offset_m: [0.2, 0.0, 0.0],
            speed_of_sound_m_s: sebench_core::doa::SPEED_OF_SOUND_M_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub stft: StftSection,
    pub mask: MaskSection,
    pub beamformer: BeamformerSection,
    pub pipelines: Vec<Pipeline>,
    pub pattern_p: f64,
    pub floor_dbfs: f64,
    pub doa_band_hz: [f64; 2],
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    pub seed: u64,
    pub synth: SynthSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            stft: StftSection::default(),
            mask: MaskSection::default(),
            beamformer: BeamformerSection::default(),
            pipelines: Pipeline::ALL.to_vec(),
            pattern_p: sebench_core::scene::DEFAULT_PATTERN,
            floor_dbfs: sebench_core::metrics::DEFAULT_FLOOR_DBFS,
            doa_band_hz: [
                sebench_core::doa::DEFAULT_BAND_HZ.0,
                sebench_core::doa::DEFAULT_BAND_HZ.1,
            ],
            jobs: 0,
            seed: 0,
            synth: SynthSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn stft_config(&self) -> Result<StftConfig, HarnessError> {
        StftConfig::new(self.stft.fft_size, self.stft.hop_size, self.stft.window.into())
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn mask_params(&self) -> MaskParams {
        self.mask.into()
    }

    pub fn beamformer_params(&self) -> BeamformerParams {
        self.beamformer.into()
    }

    pub fn band(&self) -> (f64, f64) {
        (self.doa_band_hz[0], self.doa_band_hz[1])
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        self.stft_config()?;
        if let Err(e) = self.mask_params().validate() {
            return bad(e.to_string());
        }
        if self.pipelines.is_empty() {
            return bad("no pipelines configured".into());
        }
        let mut seen = self.pipelines.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.pipelines.len() {
            return bad("pipeline listed twice".into());
        }
        if !(0.0..=1.0).contains(&self.pattern_p) {
            return bad(format!("pattern_p {} outside [0, 1]", self.pattern_p));
        }
        if !self.floor_dbfs.is_finite() {
            return bad("floor_dbfs must be finite".into());
        }
        let [lo, hi] = self.doa_band_hz;
        if !(lo >= 0.0 && lo < hi) {
            return bad(format!("doa_band_hz [{lo}, {hi}] is not an increasing pair"));
        }
        if !(self.beamformer.window_ms > 0.0) {
            return bad("beamformer.window_ms must be positive".into());
        }
        let s = &self.synth;
        if s.directions == 0 || s.snrs_db.is_empty() || s.noise_kinds.is_empty() {
            return bad("synth needs at least one direction, SNR and noise kind".into());
        }
        if !(s.duration_s > 0.5) || s.sample_rate_hz == 0 {
            return bad("synth duration must exceed 0.5 s at a positive rate".into());
        }
        if !(s.rt60_s > 0.0) || !s.drr_db.is_finite() || !(s.speed_of_sound_m_s > 0.0) {
            return bad("synth rt60_s, drr_db and speed_of_sound_m_s must be positive/finite".into());
        }
        Ok(())
    }
}
