use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Parser, Subcommand};

use sebench_core::doa::{gcc_phat, pseudo_intensity_doa};
use sebench_core::dsp::{read_wav, write_wav, AudioBuffer, BitDepth};
use sebench_core::enhance::{enhance_multichannel, ChannelMode};
use sebench_core::metrics::stoi;
use sebench_core::scene::BFormatScene;
use sebench_harness::config::{Pipeline, RunConfig};
use sebench_harness::fixtures::synth_fixtures;
use sebench_harness::manifest::read_manifest;
use sebench_harness::report::{emit_report, read_report, summary_table, Format};
use sebench_harness::eval::miso_enhance;
use sebench_harness::run_eval;

#[derive(Parser)]
#[command(name = "sebench", version, about = "Spatial speech-enhancement workbench")]
struct Cli {
    /// JSON run configuration; missing fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a fixture suite and its manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        directions: Option<usize>,
        /// Comma-separated SNR grid in dB.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        snrs: Option<Vec<f64>>,
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Enhance a 4-channel B-format WAV.
    Enhance {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "siso-per-channel")]
        pipeline: Pipeline,
        /// Second array for the delay-and-sum pipeline.
        #[arg(long)]
        mic_b: Option<PathBuf>,
    },
    /// Estimate the DOA of a 4-channel B-format WAV.
    Doa {
        #[arg(long)]
        input: PathBuf,
        /// Second array; adds the W-to-W GCC-PHAT TDOA.
        #[arg(long)]
        mic_b: Option<PathBuf>,
    },
    /// STOI of every channel of `degraded` against a mono `clean`.
    Score {
        #[arg(long)]
        clean: PathBuf,
        #[arg(long)]
        degraded: PathBuf,
    },
    /// Run the configured pipelines over a manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a report's aggregates, optionally converting it.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_scene(path: &Path) -> Result<BFormatScene<f64>> {
    let channels = read_wav::<f64>(path).with_context(|| path.display().to_string())?;
    if channels.len() != 4 {
        bail!("{}: expected 4 channels, found {}", path.display(), channels.len());
    }
    Ok(BFormatScene::from_vec(channels)?)
}

fn print_rows(format: Format, header: &[&str], rows: &[Vec<String>]) {
    match format {
        Format::Csv => {
            println!("{}", header.join(","));
            for r in rows {
                println!("{}", r.join(","));
            }
        }
        Format::Json => {
            let objs: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(k, v)| {
                            let v = v.parse::<f64>().map(serde_json::Value::from).unwrap_or_else(|_| v.clone().into());
                            (k.to_string(), v)
                        })
                        .collect::<serde_json::Map<_, _>>()
                        .into()
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&objs).expect("plain values"));
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let format: Format = cli.format.parse()?;
    let cfg = load_config(&cli)?;
    match &cli.cmd {
        Cmd::Synth {
            out,
            directions,
            snrs,
            duration,
        } => {
            let mut synth = cfg.synth.clone();
            if let Some(d) = directions {
                synth.directions = *d;
            }
            if let Some(s) = snrs {
                synth.snrs_db = s.clone();
            }
            if let Some(d) = duration {
                synth.duration_s = *d;
            }
            RunConfig { synth: synth.clone(), ..cfg.clone() }.validate()?;
            let manifest = synth_fixtures(out, &synth, cfg.seed)?;
            eprintln!("wrote {}", manifest.display());
        }
        Cmd::Enhance {
            input,
            output,
            pipeline,
            mic_b,
        } => {
            let scene = read_scene(input)?;
            let stft = cfg.stft_config()?;
            let mask = cfg.mask_params();
            let channels: Vec<AudioBuffer<f64>> = match pipeline {
                Pipeline::NoisyBaseline => scene.channels().to_vec(),
                Pipeline::SisoPerChannel => enhance_multichannel(&scene, ChannelMode::PerChannel, &mask, &stft)?.channels().to_vec(),
                Pipeline::SisoSharedMask => enhance_multichannel(&scene, ChannelMode::SharedMask, &mask, &stft)?.channels().to_vec(),
                Pipeline::MisoDelaySum => {
                    let b = mic_b.as_deref().map(read_scene).transpose()?;
                    vec![miso_enhance(&scene, b.as_ref(), &cfg)?]
                }
            };
            write_wav(output, &channels, BitDepth::Pcm16)?;
        }
        Cmd::Doa { input, mic_b } => {
            let scene = read_scene(input)?;
            let est = pseudo_intensity_doa(&scene, &cfg.stft_config()?, cfg.band())?;
            let mut header = vec!["azimuth_deg", "elevation_deg", "confidence"];
            let mut row = vec![
                est.direction.azimuth_deg().to_string(),
                est.direction.elevation_deg().to_string(),
                est.confidence.to_string(),
            ];
            if let Some(b) = mic_b {
                let b = read_scene(b)?;
                let max_lag = cfg.beamformer.max_lag_samples as f64 / scene.sample_rate_hz() as f64;
                let g = gcc_phat(scene.w(), b.w(), max_lag)?;
                header.push("tdoa_ab_s");
                row.push(g.tdoa_s.to_string());
            }
            print_rows(format, &header, &[row]);
        }
        Cmd::Score { clean, degraded } => {
            let clean = read_wav::<f64>(clean)?;
            if clean.len() != 1 {
                bail!("clean reference must be mono, found {} channels", clean.len());
            }
            let rows = read_wav::<f64>(degraded)?
                .iter()
                .enumerate()
                .map(|(i, c)| Ok(vec![i.to_string(), stoi(&clean[0], c)?.value().to_string()]))
                .collect::<Result<Vec<_>>>()?;
            print_rows(format, &["channel", "stoi"], &rows);
        }
        Cmd::Eval { manifest, out } => {
            let entries = read_manifest(manifest)?;
            let report = run_eval(&entries, &cfg)?;
            emit_report(&report, format, out)?;
            eprint!("{}", summary_table(&report));
            return Ok(report.exit_code() as u8);
        }
        Cmd::Report { input, out } => {
            let report = read_report(input)?;
            print!("{}", summary_table(&report));
            if let Some(out) = out {
                emit_report(&report, format, out)?;
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors are fatal (1); 2 is reserved for partial batches.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
