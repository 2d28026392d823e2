use std::path::Path;

use sebench_core::dsp::{write_wav, AudioBuffer, BitDepth};
use sebench_harness::load_manifest;

fn tone(len: usize, rate: u32) -> AudioBuffer<f64> {
    AudioBuffer::new((0..len).map(|i| 0.3 * (i as f64 * 0.05).sin()).collect(), rate).unwrap()
}

fn write(dir: &Path, name: &str, channels: usize, rate: u32) {
    let chans: Vec<_> = (0..channels).map(|_| tone(4000, rate)).collect();
    write_wav(dir.join(name), &chans, BitDepth::Pcm16).unwrap();
}

#[test]
fn two_entry_manifest_loads() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "a.wav", 4, 16_000);
    write(d.path(), "b.wav", 4, 16_000);
    write(d.path(), "t.wav", 1, 16_000);
    let text = r#"[
        {"id": "one", "mic_a": "a.wav", "mic_b": "b.wav", "target": "t.wav", "doa_xyz": [-0.891, 0.441, 0.220]},
        {"id": "two", "mic_a": "a.wav", "target": "t.wav", "doa_sph": [-30, 10]}
    ]"#;
    std::fs::write(d.path().join("m.json"), text).unwrap();
    let entries = load_manifest(&d.path().join("m.json")).unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0].id, "one");
    assert_eq!(entries[0].mic_b.as_deref(), Some(d.path().join("b.wav").as_path()));
    assert_eq!(entries[1].mic_b, None);
    let t = entries[0].doa_truth().unwrap().unwrap();
    assert!((t.azimuth_deg() - 153.667).abs() < 1e-2);
    assert!((t.elevation_deg() - 12.478).abs() < 1e-2);
}

#[test]
fn wrong_channel_count_names_entry_and_expectation() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "stereo.wav", 2, 16_000);
    write(d.path(), "ok.wav", 4, 16_000);
    write(d.path(), "t.wav", 1, 16_000);
    let text = r#"[
        {"id": "good", "mic_a": "ok.wav", "target": "t.wav"},
        {"id": "bad-stereo", "mic_a": "stereo.wav", "target": "t.wav"},
        {"id": "bad-missing", "mic_a": "nope.wav", "target": "t.wav"}
    ]"#;
    std::fs::write(d.path().join("m.json"), text).unwrap();
    let msg = load_manifest(&d.path().join("m.json")).unwrap_err().to_string();
    assert!(msg.contains("bad-stereo"), "{msg}");
    assert!(msg.contains("expected 4 channels, found 2"), "{msg}");
    assert!(msg.contains("bad-missing"), "{msg}");
    assert!(!msg.contains("good"), "{msg}");
}

#[test]
fn inconsistent_rates_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "a.wav", 4, 16_000);
    write(d.path(), "t.wav", 1, 8_000);
    std::fs::write(d.path().join("m.json"), r#"[{"id": "x", "mic_a": "a.wav", "target": "t.wav"}]"#).unwrap();
    let msg = load_manifest(&d.path().join("m.json")).unwrap_err().to_string();
    assert!(msg.contains("x: target rate 8000 Hz"), "{msg}");
}
