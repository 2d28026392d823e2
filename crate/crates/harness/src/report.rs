//! JSON and CSV report files.
//!
//! CSV has one row per (entry, pipeline) in the column order of
//! [`CSV_COLUMNS`]; absent values are empty fields. JSON carries the full
//! report including aggregates.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Pipeline;
use crate::eval::{DoaRecord, ErrorRecord, EvalReport, OutputKind, Record, SpatialRecord};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(HarnessError::Config(format!("unknown format `{other}`"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 26] = [
    "id",
    "pipeline",
    "output",
    "stoi_w",
    "stoi_x",
    "stoi_y",
    "stoi_z",
    "stoi_mono",
    "doa_azimuth_deg",
    "doa_elevation_deg",
    "doa_confidence",
    "truth_azimuth_deg",
    "truth_elevation_deg",
    "err_azimuth_deg",
    "err_elevation_deg",
    "err_elevation_abs_deg",
    "err_great_circle_deg",
    "icld_rms_db",
    "icpd_rms_rad",
    "active_bins",
    "icld_resynth_rms_db",
    "icpd_resynth_rms_rad",
    "active_bins_resynth",
    "tdoa_ab_s",
    "stoi_out_of_range",
    "stoi_channel_count",
];

/// Flat CSV row. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Row {
    id: String,
    pipeline: Pipeline,
    output: OutputKind,
    stoi_w: Option<f64>,
    stoi_x: Option<f64>,
    stoi_y: Option<f64>,
    stoi_z: Option<f64>,
    stoi_mono: f64,
    doa_azimuth_deg: Option<f64>,
    doa_elevation_deg: Option<f64>,
    doa_confidence: Option<f64>,
    truth_azimuth_deg: Option<f64>,
    truth_elevation_deg: Option<f64>,
    err_azimuth_deg: Option<f64>,
    err_elevation_deg: Option<f64>,
    err_elevation_abs_deg: Option<f64>,
    err_great_circle_deg: Option<f64>,
    icld_rms_db: Option<f64>,
    icpd_rms_rad: Option<f64>,
    active_bins: Option<usize>,
    icld_resynth_rms_db: Option<f64>,
    icpd_resynth_rms_rad: Option<f64>,
    active_bins_resynth: Option<usize>,
    tdoa_ab_s: Option<f64>,
    stoi_out_of_range: bool,
    stoi_channel_count: usize,
}

impl From<&Record> for Row {
    fn from(r: &Record) -> Self {
        let ch = |i: usize| match r.output {
            OutputKind::Scene => r.stoi_channels.get(i).copied(),
            OutputKind::Mono => None,
        };
        Row {
            id: r.id.clone(),
            pipeline: r.pipeline,
            output: r.output,
            stoi_w: ch(0),
            stoi_x: ch(1),
            stoi_y: ch(2),
            stoi_z: ch(3),
            stoi_mono: r.stoi_mono,
            doa_azimuth_deg: r.doa.map(|d| d.azimuth_deg),
            doa_elevation_deg: r.doa.map(|d| d.elevation_deg),
            doa_confidence: r.doa.map(|d| d.confidence),
            truth_azimuth_deg: r.truth.map(|t| t[0]),
            truth_elevation_deg: r.truth.map(|t| t[1]),
            err_azimuth_deg: r.angular_error.map(|e| e.d_azimuth_deg),
            err_elevation_deg: r.angular_error.map(|e| e.d_elevation_deg),
            err_elevation_abs_deg: r.angular_error.map(|e| e.abs_d_elevation_deg),
            err_great_circle_deg: r.angular_error.map(|e| e.great_circle_deg),
            icld_rms_db: r.spatial.map(|s| s.icld_rms_db),
            icpd_rms_rad: r.spatial.map(|s| s.icpd_rms_rad),
            active_bins: r.spatial.map(|s| s.active_bin_count),
            icld_resynth_rms_db: r.spatial_resynth.map(|s| s.icld_rms_db),
            icpd_resynth_rms_rad: r.spatial_resynth.map(|s| s.icpd_rms_rad),
            active_bins_resynth: r.spatial_resynth.map(|s| s.active_bin_count),
            tdoa_ab_s: r.tdoa_ab_s,
            stoi_out_of_range: r.stoi_out_of_range,
            stoi_channel_count: r.stoi_channels.len(),
        }
    }
}

fn both<A, B>(a: Option<A>, b: Option<B>) -> Option<(A, B)> {
    a.zip(b)
}

impl Row {
    fn into_record(self) -> Result<Record, HarnessError> {
        let stoi_channels = match self.output {
            OutputKind::Scene => [self.stoi_w, self.stoi_x, self.stoi_y, self.stoi_z]
                .into_iter()
                .take(self.stoi_channel_count)
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| HarnessError::Manifest(format!("{}: missing channel STOI", self.id)))?,
            OutputKind::Mono => vec![self.stoi_mono; self.stoi_channel_count],
        };
        let doa = both(self.doa_azimuth_deg, self.doa_elevation_deg)
            .zip(self.doa_confidence)
            .map(|((azimuth_deg, elevation_deg), confidence)| DoaRecord {
                azimuth_deg,
                elevation_deg,
                confidence,
            });
        let angular_error = both(self.err_azimuth_deg, self.err_elevation_deg)
            .zip(both(self.err_elevation_abs_deg, self.err_great_circle_deg))
            .map(|((a, e), (ae, g))| ErrorRecord {
                d_azimuth_deg: a,
                d_elevation_deg: e,
                abs_d_elevation_deg: ae,
                great_circle_deg: g,
            });
        let spatial = both(self.icld_rms_db, self.icpd_rms_rad)
            .zip(self.active_bins)
            .map(|((l, p), n)| SpatialRecord {
                icld_rms_db: l,
                icpd_rms_rad: p,
                active_bin_count: n,
            });
        let spatial_resynth = both(self.icld_resynth_rms_db, self.icpd_resynth_rms_rad)
            .zip(self.active_bins_resynth)
            .map(|((l, p), n)| SpatialRecord {
                icld_rms_db: l,
                icpd_rms_rad: p,
                active_bin_count: n,
            });
        Ok(Record {
            id: self.id,
            pipeline: self.pipeline,
            output: self.output,
            stoi_channels,
            stoi_mono: self.stoi_mono,
            doa,
            truth: both(self.truth_azimuth_deg, self.truth_elevation_deg).map(|(a, e)| [a, e]),
            angular_error,
            spatial,
            spatial_resynth,
            tdoa_ab_s: self.tdoa_ab_s,
            stoi_out_of_range: self.stoi_out_of_range,
        })
    }
}

pub fn to_json(report: &EvalReport) -> Result<String, HarnessError> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

pub fn from_json(text: &str) -> Result<EvalReport, HarnessError> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_csv(records: &[Record]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        w.serialize(Row::from(r))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<Record>, HarnessError> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(HarnessError::Config("unexpected CSV header".into()));
    }
    rd.deserialize::<Row>()
        .map(|row| row?.into_record())
        .collect()
}

pub fn emit_report(report: &EvalReport, format: Format, path: &Path) -> Result<(), HarnessError> {
    let text = match format {
        Format::Json => to_json(report)?,
        Format::Csv => to_csv(&report.records)?,
    };
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_report(path: &Path) -> Result<EvalReport, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    from_json(&text)
}

/// Plain-text table of the aggregates, one line per (pipeline, metric).
pub fn summary_table(report: &EvalReport) -> String {
    let mut out = format!(
        "entries: {} processed, {} failed, {} total\n{:<18} {:<18} {:>5} {:>10} {:>10} {:>10} {:>10}\n",
        report.entries_processed,
        report.entries_failed,
        report.entries_total,
        "pipeline",
        "metric",
        "n",
        "mean",
        "median",
        "q1",
        "q3"
    );
    for a in &report.aggregates {
        out.push_str(&format!(
            "{:<18} {:<18} {:>5} {:>10.4} {:>10.4} {:>10.4} {:>10.4}\n",
            a.pipeline.as_str(),
            a.metric,
            a.summary.count,
            a.summary.mean,
            a.summary.median,
            a.summary.q1,
            a.summary.q3
        ));
    }
    for f in &report.failures {
        out.push_str(&format!("failed {}: {}\n", f.id, f.error));
    }
    out
}
