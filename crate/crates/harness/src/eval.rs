//! Batch evaluation: every entry through every configured pipeline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sebench_core::doa::{angular_error, gcc_phat, pseudo_intensity_doa};
use sebench_core::dsp::{stft, AudioBuffer, Spectrogram, StftConfig};
use sebench_core::enhance::{
    delay_sum_beamform, enhance_multichannel_detailed, enhance_siso, ncc_align, BeamformerParams,
    ChannelMode, MaskParams,
};
use sebench_core::metrics::{icld_icpd_deviation, spatial_deviation, stoi, SpatialDeviation};
use sebench_core::scene::{steer_to_mono, BFormatScene, Direction, DEFAULT_W_GAIN};
use sebench_core::Error as CoreError;

use crate::config::{Pipeline, RunConfig};
use crate::manifest::{load_entry_audio, EntryAudio, ManifestEntry};
use crate::stats::{summarize, Summary};
use crate::HarnessError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    Scene,
    Mono,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoaRecord {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    /// Signed `estimate - truth`, wrapped to `(-180, 180]`.
    pub d_azimuth_deg: f64,
    pub d_elevation_deg: f64,
    pub abs_d_elevation_deg: f64,
    pub great_circle_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialRecord {
    pub icld_rms_db: f64,
    pub icpd_rms_rad: f64,
    pub active_bin_count: usize,
}

impl From<SpatialDeviation> for SpatialRecord {
    fn from(d: SpatialDeviation) -> Self {
        Self {
            icld_rms_db: d.icld_rms_db,
            icpd_rms_rad: d.icpd_rms_rad,
            active_bin_count: d.active_bin_count,
        }
    }
}

/// Scores of one pipeline on one entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub pipeline: Pipeline,
    pub output: OutputKind,
    /// Per output channel: W, X, Y, Z for scenes, the single channel for mono.
    pub stoi_channels: Vec<f64>,
    /// Steered mono at the estimated DOA for scenes; the output itself for mono.
    pub stoi_mono: f64,
    /// Absent for mono outputs.
    pub doa: Option<DoaRecord>,
    /// Ground truth `[azimuth, elevation]` when the manifest has one.
    pub truth: Option<[f64; 2]>,
    pub angular_error: Option<ErrorRecord>,
    /// Deviation between the spectrograms before and after masking.
    pub spatial: Option<SpatialRecord>,
    /// Deviation after re-analysing the resynthesised scene.
    pub spatial_resynth: Option<SpatialRecord>,
    /// GCC-PHAT lag of Mic B's W channel behind Mic A's, seconds.
    pub tdoa_ab_s: Option<f64>,
    /// Some STOI value fell outside `[0, 1]`.
    pub stoi_out_of_range: bool,
}

impl Record {
    pub fn stoi_w(&self) -> Option<f64> {
        match self.output {
            OutputKind::Scene => self.stoi_channels.first().copied(),
            OutputKind::Mono => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub pipeline: Pipeline,
    pub metric: String,
    #[serde(flatten)]
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format_version: u32,
    /// Wall-clock time of the run; the only non-deterministic field.
    pub generated_at: Option<String>,
    /// Parallelism is not recorded (`jobs` is stored as 0).
    pub config: RunConfig,
    pub entries_total: usize,
    pub entries_processed: usize,
    pub entries_failed: usize,
    pub failures: Vec<Failure>,
    pub records: Vec<Record>,
    pub aggregates: Vec<Aggregate>,
}

impl EvalReport {
    pub fn exit_code(&self) -> i32 {
        if self.entries_failed > 0 {
            2
        } else {
            0
        }
    }

    pub fn without_timestamp(&self) -> Self {
        Self {
            generated_at: None,
            ..self.clone()
        }
    }
}

pub const AGGREGATE_METRICS: [&str; 6] = [
    "stoi_mono",
    "stoi_w",
    "great_circle_deg",
    "abs_d_azimuth_deg",
    "icld_rms_db",
    "icpd_rms_rad",
];

fn metric(r: &Record, name: &str) -> Option<f64> {
    match name {
        "stoi_mono" => Some(r.stoi_mono),
        "stoi_w" => r.stoi_w(),
        "great_circle_deg" => r.angular_error.map(|e| e.great_circle_deg),
        "abs_d_azimuth_deg" => r.angular_error.map(|e| e.d_azimuth_deg.abs()),
        "icld_rms_db" => r.spatial.map(|s| s.icld_rms_db),
        "icpd_rms_rad" => r.spatial.map(|s| s.icpd_rms_rad),
        _ => None,
    }
}

/// Per-pipeline summaries over `records`, in record order.
pub fn compute_aggregates(records: &[Record], pipelines: &[Pipeline]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &p in pipelines {
        for name in AGGREGATE_METRICS {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.pipeline == p)
                .filter_map(|r| metric(r, name))
                .collect();
            if let Some(summary) = summarize(&values) {
                out.push(Aggregate {
                    pipeline: p,
                    metric: name.to_string(),
                    summary,
                });
            }
        }
    }
    out
}

/// Settings shared by every entry, validated once.
pub(crate) struct Context {
    pub stft: StftConfig,
    pub mask: MaskParams,
    pub beam: BeamformerParams,
    pub postfilter: bool,
    pub band: (f64, f64),
    pub pattern_p: f64,
    pub floor_dbfs: f64,
}

impl Context {
    pub fn new(cfg: &RunConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        Ok(Self {
            stft: cfg.stft_config()?,
            mask: cfg.mask_params(),
            beam: cfg.beamformer_params(),
            postfilter: cfg.beamformer.postfilter,
            band: cfg.band(),
            pattern_p: cfg.pattern_p,
            floor_dbfs: cfg.floor_dbfs,
        })
    }
}

type Step<T> = Result<T, String>;

fn step<T>(what: &str, r: Result<T, CoreError>) -> Step<T> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn miso_with(
    mic_a: &BFormatScene<f64>,
    mic_b: Option<&BFormatScene<f64>>,
    ctx: &Context,
) -> Result<AudioBuffer<f64>, CoreError> {
    let mut channels = vec![mic_a.w().clone()];
    if let Some(b) = mic_b {
        channels.push(b.w().clone());
    }
    let summed = if channels.len() > 1 {
        let align = ncc_align(&channels, &ctx.beam)?;
        delay_sum_beamform(&channels, &align.delays)?
    } else {
        channels.pop().expect("one channel")
    };
    if ctx.postfilter {
        enhance_siso(&summed, &ctx.mask, &ctx.stft)
    } else {
        Ok(summed)
    }
}

/// The MISO pipeline: delay-and-sum over Mic A's and Mic B's omni (W)
/// channels, or Mic A's alone without Mic B, followed by the
/// single-channel mask when `beamformer.postfilter` is set.
pub fn miso_enhance(
    mic_a: &BFormatScene<f64>,
    mic_b: Option<&BFormatScene<f64>>,
    cfg: &RunConfig,
) -> Result<AudioBuffer<f64>, HarnessError> {
    Ok(miso_with(mic_a, mic_b, &Context::new(cfg)?)?)
}

fn score(target: &AudioBuffer<f64>, x: &AudioBuffer<f64>) -> Step<f64> {
    step("stoi", stoi(target, x).map(|s| s.value()))
}

struct SceneOutput {
    scene: BFormatScene<f64>,
    spatial: Option<SpatialRecord>,
    spatial_resynth: Option<SpatialRecord>,
}

fn scene_output(p: Pipeline, audio: &EntryAudio, ctx: &Context) -> Step<SceneOutput> {
    let mode = match p {
        Pipeline::NoisyBaseline => {
            let spectra = audio
                .mic_a
                .channels()
                .iter()
                .map(|c| step("stft", stft(c, &ctx.stft)))
                .collect::<Step<Vec<_>>>()?;
            let spectra: [Spectrogram<f64>; 4] = spectra.try_into().expect("four channels");
            return Ok(SceneOutput {
                scene: audio.mic_a.clone(),
                spatial: spatial_deviation(&spectra, &spectra, ctx.floor_dbfs).ok().map(Into::into),
                spatial_resynth: None,
            });
        }
        Pipeline::SisoPerChannel => ChannelMode::PerChannel,
        Pipeline::SisoSharedMask => ChannelMode::SharedMask,
        Pipeline::MisoDelaySum => unreachable!("mono pipeline"),
    };
    let r = step("enhance", enhance_multichannel_detailed(&audio.mic_a, mode, &ctx.mask, &ctx.stft))?;
    let spatial = spatial_deviation(&r.noisy, &r.enhanced, ctx.floor_dbfs).ok().map(Into::into);
    let spatial_resynth = icld_icpd_deviation(&audio.mic_a, &r.scene, &ctx.stft, ctx.floor_dbfs)
        .ok()
        .map(Into::into);
    Ok(SceneOutput {
        scene: r.scene,
        spatial,
        spatial_resynth,
    })
}

fn evaluate_entry(entry: &ManifestEntry, pipelines: &[Pipeline], ctx: &Context) -> Step<Vec<Record>> {
    let audio = load_entry_audio(entry)?;
    let truth = entry.doa_truth()?;
    let rate = audio.mic_a.sample_rate_hz();
    let tdoa_ab_s = audio.mic_b.as_ref().and_then(|b| {
        let max_lag_s = ctx.beam.max_lag_samples as f64 / rate as f64;
        gcc_phat(audio.mic_a.w(), b.w(), max_lag_s).ok().map(|g| g.tdoa_s)
    });
    let truth_pair = truth.map(|d: Direction| [d.azimuth_deg(), d.elevation_deg()]);

    let mut records = Vec::with_capacity(pipelines.len());
    for &p in pipelines {
        let record = if p.outputs_scene() {
            let out = scene_output(p, &audio, ctx)?;
            let est = step("doa", pseudo_intensity_doa(&out.scene, &ctx.stft, ctx.band))?;
            let mono = step(
                "steer",
                steer_to_mono(&out.scene, &est.direction, ctx.pattern_p, DEFAULT_W_GAIN),
            )?;
            let stoi_channels = out
                .scene
                .channels()
                .iter()
                .map(|c| score(&audio.target, c))
                .collect::<Step<Vec<f64>>>()?;
            let stoi_mono = score(&audio.target, &mono)?;
            let out_of_range = stoi_channels
                .iter()
                .chain([&stoi_mono])
                .any(|s| !(0.0..=1.0).contains(s));
            let angular = truth.map(|t| {
                let e = angular_error(&est.direction, &t);
                ErrorRecord {
                    d_azimuth_deg: e.d_azimuth_deg,
                    d_elevation_deg: e.d_elevation_deg,
                    abs_d_elevation_deg: e.d_elevation_deg.abs(),
                    great_circle_deg: e.great_circle_deg,
                }
            });
            Record {
                id: entry.id.clone(),
                pipeline: p,
                output: OutputKind::Scene,
                stoi_out_of_range: out_of_range,
                stoi_channels,
                stoi_mono,
                doa: Some(DoaRecord {
                    azimuth_deg: est.direction.azimuth_deg(),
                    elevation_deg: est.direction.elevation_deg(),
                    confidence: est.confidence,
                }),
                truth: truth_pair,
                angular_error: angular,
                spatial: out.spatial,
                spatial_resynth: out.spatial_resynth,
                tdoa_ab_s,
            }
        } else {
            let out = step("miso", miso_with(&audio.mic_a, audio.mic_b.as_ref(), ctx))?;
            let s = score(&audio.target, &out)?;
            Record {
                id: entry.id.clone(),
                pipeline: p,
                output: OutputKind::Mono,
                stoi_channels: vec![s],
                stoi_mono: s,
                doa: None,
                truth: truth_pair,
                angular_error: None,
                spatial: None,
                spatial_resynth: None,
                tdoa_ab_s,
                stoi_out_of_range: !(0.0..=1.0).contains(&s),
            }
        };
        records.push(record);
    }
    Ok(records)
}

fn timestamp() -> Option<String> {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .ok()
}

/// Runs the configured pipelines on every entry with `cfg.jobs` workers.
/// A failing entry is recorded in `failures` and never aborts the batch.
/// Records are ordered by entry id, then by configured pipeline order.
pub fn run_eval(entries: &[ManifestEntry], cfg: &RunConfig) -> Result<EvalReport, HarnessError> {
    let ctx = Context::new(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let mut results: Vec<(&str, Step<Vec<Record>>)> = pool.install(|| {
        entries
            .par_iter()
            .map(|e| (e.id.as_str(), evaluate_entry(e, &cfg.pipelines, &ctx)))
            .collect()
    });
    results.sort_by(|a, b| a.0.cmp(b.0));

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (id, r) in results {
        match r {
            Ok(rs) => records.extend(rs),
            Err(error) => failures.push(Failure {
                id: id.to_string(),
                error,
            }),
        }
    }
    let aggregates = compute_aggregates(&records, &cfg.pipelines);
    Ok(EvalReport {
        format_version: FORMAT_VERSION,
        generated_at: timestamp(),
        config: RunConfig {
            jobs: 0,
            ..cfg.clone()
        },
        entries_total: entries.len(),
        entries_processed: entries.len() - failures.len(),
        entries_failed: failures.len(),
        failures,
        records,
        aggregates,
    })
}
