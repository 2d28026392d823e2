mod common;

use common::{config, small_suite, synth};
use sebench_core::dsp::{write_wav, AudioBuffer, BitDepth};
use sebench_harness::eval::{compute_aggregates, OutputKind};
use sebench_harness::report::{from_csv, from_json, to_csv, to_json};
use sebench_harness::{read_manifest, run_eval, Pipeline, RunConfig};

#[test]
fn identity_entry_scores_one_on_the_baseline() {
    let d = tempfile::tempdir().unwrap();
    let (s, _) = sebench_oracles::fixtures::speech_like(2.0, 16_000, 3);
    let t = AudioBuffer::new(s, 16_000).unwrap();
    write_wav(d.path().join("t.wav"), std::slice::from_ref(&t), BitDepth::Pcm16).unwrap();
    let four = vec![t.clone(), t.clone(), t.clone(), t];
    write_wav(d.path().join("a.wav"), &four, BitDepth::Pcm16).unwrap();
    std::fs::write(d.path().join("m.json"), r#"[{"id": "same", "mic_a": "a.wav", "target": "t.wav"}]"#).unwrap();
    let entries = read_manifest(&d.path().join("m.json")).unwrap();
    let cfg = RunConfig {
        pipelines: vec![Pipeline::NoisyBaseline],
        ..config(1)
    };
    let report = run_eval(&entries, &cfg).unwrap();
    assert_eq!(report.entries_failed, 0);
    let r = &report.records[0];
    for s in r.stoi_channels.iter().chain([&r.stoi_mono]) {
        assert!((s - 1.0).abs() < 1e-6, "{s}");
    }
    assert!(r.angular_error.is_none());
}

#[test]
fn fixture_batch_contracts() {
    let d = tempfile::tempdir().unwrap();
    let manifest = synth(d.path(), &small_suite(4, &[0.0, 10.0]), 21);
    let entries = read_manifest(&manifest).unwrap();
    let report = run_eval(&entries, &config(0)).unwrap();
    assert_eq!(report.entries_failed, 0);
    assert_eq!(report.entries_processed + report.entries_failed, entries.len());
    assert_eq!(report.records.len(), entries.len() * 4);

    let get = |id: &str, p: Pipeline| report.records.iter().find(|r| r.id == id && r.pipeline == p).unwrap();
    let mut gc = Vec::new();
    for e in &entries {
        let noisy = get(&e.id, Pipeline::NoisyBaseline);
        let siso = get(&e.id, Pipeline::SisoPerChannel);
        assert!(siso.stoi_w().unwrap() >= noisy.stoi_w().unwrap() - 0.01, "{}", e.id);
        assert!(siso.spatial.unwrap().icpd_rms_rad < 1e-9);
        assert!(get(&e.id, Pipeline::SisoSharedMask).spatial.unwrap().icld_rms_db < 1e-9);
        gc.push(siso.angular_error.unwrap().great_circle_deg);
        let miso = get(&e.id, Pipeline::MisoDelaySum);
        assert_eq!(miso.output, OutputKind::Mono);
        assert!(miso.doa.is_none() && miso.angular_error.is_none() && miso.spatial.is_none());
        assert!(siso.tdoa_ab_s.is_some());
    }
    gc.sort_by(f64::total_cmp);
    let median = (gc[gc.len() / 2 - 1] + gc[gc.len() / 2]) / 2.0;
    assert!(median < 2.0, "{median}");
}

#[test]
fn report_is_independent_of_parallelism_and_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let manifest = synth(d.path(), &small_suite(2, &[5.0, 15.0]), 8);
    let entries = read_manifest(&manifest).unwrap();
    let serial = run_eval(&entries, &config(1)).unwrap();
    let parallel = run_eval(&entries, &config(4)).unwrap();
    assert!(serial.generated_at.is_some());
    let a = to_json(&serial.without_timestamp()).unwrap();
    let b = to_json(&parallel.without_timestamp()).unwrap();
    assert_eq!(a, b);

    let ids: Vec<&str> = serial.records.iter().map(|r| r.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);

    assert_eq!(from_json(&to_json(&serial).unwrap()).unwrap(), serial);

    let csv = to_csv(&serial.records).unwrap();
    assert_eq!(csv.lines().count(), entries.len() * 4 + 1);
    let back = from_csv(&csv).unwrap();
    assert_eq!(back, serial.records);

    let recomputed = compute_aggregates(&back, &serial.config.pipelines);
    assert_eq!(recomputed.len(), serial.aggregates.len());
    for (x, y) in recomputed.iter().zip(&serial.aggregates) {
        assert_eq!((x.pipeline, &x.metric), (y.pipeline, &y.metric));
        for (p, q) in [
            (x.summary.mean, y.summary.mean),
            (x.summary.median, y.summary.median),
            (x.summary.q1, y.summary.q1),
            (x.summary.q3, y.summary.q3),
        ] {
            assert!((p - q).abs() <= 1e-12);
        }
    }
}

#[test]
fn corrupt_entry_is_recorded_not_fatal() {
    let d = tempfile::tempdir().unwrap();
    let manifest = synth(d.path(), &small_suite(5, &[0.0, 10.0]), 2);
    let victim = d.path().join("fx0003_mic_a.wav");
    let bytes = std::fs::read(&victim).unwrap();
    std::fs::write(&victim, &bytes[..30]).unwrap();
    let entries = read_manifest(&manifest).unwrap();
    assert_eq!(entries.len(), 10);
    let report = run_eval(&entries, &config(0)).unwrap();
    assert_eq!(report.entries_processed, 9);
    assert_eq!(report.entries_failed, 1);
    assert_eq!(report.failures[0].id, "fx0003");
    assert!(report.failures[0].error.contains("mic_a"), "{}", report.failures[0].error);
    assert_eq!(report.exit_code(), 2);
    assert!(report.records.iter().all(|r| r.id != "fx0003"));
}
