//! Dataset manifest: a JSON array of entries pointing at WAV files.
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sebench_core::dsp::{read_wav, AudioBuffer};
use sebench_core::scene::{cartesian_to_spherical, BFormatScene, Direction};

use crate::HarnessError;

pub const MIC_CHANNELS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub mic_a: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mic_b: Option<PathBuf>,
    pub target: PathBuf,
    /// Source position or direction, Cartesian (any positive scale).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doa_xyz: Option<[f64; 3]>,
    /// Azimuth and elevation in degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doa_sph: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<EntryMeta>,
}

/// Free-form fixture annotations; ignored by the evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
}

impl ManifestEntry {
    pub fn doa_truth(&self) -> Result<Option<Direction>, String> {
        match (self.doa_xyz, self.doa_sph) {
            (Some(_), Some(_)) => Err("both doa_xyz and doa_sph given".into()),
            (Some(v), None) => {
                if v.iter().any(|c| !c.is_finite()) {
                    return Err("doa_xyz is not finite".into());
                }
                cartesian_to_spherical(v).map(Some).map_err(|e| format!("doa_xyz: {e}"))
            }
            (None, Some([_, el])) if !(-90.0..=90.0).contains(&el) => {
                Err(format!("doa_sph: elevation {el} outside [-90, 90]"))
            }
            (None, Some([az, el])) => Direction::normalized(az, el)
                .map(Some)
                .map_err(|e| format!("doa_sph: {e}")),
            (None, None) => Ok(None),
        }
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.mic_a);
        if let Some(b) = self.mic_b.as_mut() {
            join(b);
        }
        join(&mut self.target);
    }
}

/// Audio referenced by one entry.
#[derive(Debug, Clone)]
pub struct EntryAudio {
    pub mic_a: BFormatScene<f64>,
    pub mic_b: Option<BFormatScene<f64>>,
    pub target: AudioBuffer<f64>,
}

fn read_scene(label: &str, path: &Path) -> Result<BFormatScene<f64>, String> {
    let channels = read_wav::<f64>(path).map_err(|e| format!("{label} {}: {e}", path.display()))?;
    if channels.len() != MIC_CHANNELS {
        return Err(format!(
            "{label} {}: expected {MIC_CHANNELS} channels, found {}",
            path.display(),
            channels.len()
        ));
    }
    BFormatScene::from_vec(channels).map_err(|e| format!("{label}: {e}"))
}

/// Reads and cross-checks every file of `entry`.
pub fn load_entry_audio(entry: &ManifestEntry) -> Result<EntryAudio, String> {
    entry.doa_truth()?;
    let mic_a = read_scene("mic_a", &entry.mic_a)?;
    let mic_b = entry
        .mic_b
        .as_deref()
        .map(|p| read_scene("mic_b", p))
        .transpose()?;
    let target = read_wav::<f64>(&entry.target)
        .map_err(|e| format!("target {}: {e}", entry.target.display()))?;
    if target.len() != 1 {
        return Err(format!(
            "target {}: expected 1 channel, found {}",
            entry.target.display(),
            target.len()
        ));
    }
    let target = target.into_iter().next().expect("one channel");
    let rate = mic_a.sample_rate_hz();
    if let Some(b) = &mic_b {
        if b.sample_rate_hz() != rate {
            return Err(format!("mic_b rate {} Hz differs from mic_a {rate} Hz", b.sample_rate_hz()));
        }
        if b.len() != mic_a.len() {
            return Err(format!("mic_b length {} differs from mic_a {}", b.len(), mic_a.len()));
        }
    }
    if target.sample_rate_hz() != rate {
        return Err(format!(
            "target rate {} Hz differs from mic_a {rate} Hz",
            target.sample_rate_hz()
        ));
    }
    Ok(EntryAudio { mic_a, mic_b, target })
}

/// Schema-level parse: JSON shape, unique ids, well-formed DOA fields.
/// Files are not touched.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<ManifestEntry>, HarnessError> {
    let mut entries: Vec<ManifestEntry> =
        serde_json::from_str(text).map_err(|e| HarnessError::Manifest(e.to_string()))?;
    let mut problems = String::new();
    let mut seen = HashSet::new();
    for (i, e) in entries.iter().enumerate() {
        if e.id.trim().is_empty() {
            let _ = writeln!(problems, "  entry #{i}: empty id");
        } else if !seen.insert(e.id.clone()) {
            let _ = writeln!(problems, "  {}: duplicate id", e.id);
        }
        if let Err(m) = e.doa_truth() {
            let _ = writeln!(problems, "  {}: {m}", e.id);
        }
    }
    if !problems.is_empty() {
        return Err(HarnessError::Manifest(format!("invalid entries:\n{problems}")));
    }
    entries.iter_mut().for_each(|e| e.resolve(base_dir));
    Ok(entries)
}

/// Reads and schema-checks a manifest file without opening the audio.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, base)
}

/// Strict load: schema check plus every referenced file opened and
/// validated. All offending entries are listed in the error.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, HarnessError> {
    let entries = read_manifest(path)?;
    let mut problems = String::new();
    for e in &entries {
        if let Err(m) = load_entry_audio(e) {
            let _ = writeln!(problems, "  {}: {m}", e.id);
        }
    }
    if !problems.is_empty() {
        return Err(HarnessError::Manifest(format!("invalid entries:\n{problems}")));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_truth_converts() {
        let text = r#"[{"id": "a", "mic_a": "a.wav", "target": "t.wav", "doa_xyz": [-0.891, 0.441, 0.220]}]"#;
        let entries = parse_manifest(text, Path::new("/data")).unwrap();
        assert_eq!(entries[0].mic_a, PathBuf::from("/data/a.wav"));
        let d = entries[0].doa_truth().unwrap().unwrap();
        // atan2(0.441, -0.891) and asin(0.220 / |v|).
        assert!((d.azimuth_deg() - 153.6669).abs() < 1e-3);
        assert!((d.elevation_deg() - 12.4777).abs() < 1e-3);
    }

    #[test]
    fn spherical_truth_and_absent_truth() {
        let text = r#"[
            {"id": "a", "mic_a": "a.wav", "target": "t.wav", "doa_sph": [153.1, 12.71]},
            {"id": "b", "mic_a": "/abs/b.wav", "mic_b": "b2.wav", "target": "t.wav"}
        ]"#;
        let entries = parse_manifest(text, Path::new("d")).unwrap();
        let d = entries[0].doa_truth().unwrap().unwrap();
        assert_eq!((d.azimuth_deg(), d.elevation_deg()), (153.1, 12.71));
        assert_eq!(entries[1].doa_truth().unwrap(), None);
        assert_eq!(entries[1].mic_a, PathBuf::from("/abs/b.wav"));
        assert_eq!(entries[1].mic_b, Some(PathBuf::from("d/b2.wav")));
    }

    #[test]
    fn schema_errors_list_every_entry() {
        let text = r#"[
            {"id": "a", "mic_a": "a.wav", "target": "t.wav", "doa_xyz": [0, 0, 0]},
            {"id": "a", "mic_a": "a.wav", "target": "t.wav"},
            {"id": "c", "mic_a": "a.wav", "target": "t.wav", "doa_sph": [0, 95]}
        ]"#;
        let msg = parse_manifest(text, Path::new(".")).unwrap_err().to_string();
        assert!(msg.contains("a: doa_xyz"), "{msg}");
        assert!(msg.contains("a: duplicate id"), "{msg}");
        assert!(msg.contains("c: doa_sph"), "{msg}");
    }

    #[test]
    fn malformed_json_and_unknown_fields() {
        assert!(parse_manifest("{", Path::new(".")).is_err());
        assert!(parse_manifest(r#"[{"id": "a", "mic_a": "a", "target": "t", "extra": 1}]"#, Path::new(".")).is_err());
        assert!(parse_manifest(r#"[{"id": "a", "target": "t"}]"#, Path::new(".")).is_err());
    }
}
