#![allow(dead_code)]

use std::path::{Path, PathBuf};

use sebench_harness::config::{RunConfig, SynthSection};
use sebench_harness::fixtures::synth_fixtures;

pub fn small_suite(directions: usize, snrs: &[f64]) -> SynthSection {
    SynthSection {
        directions,
        snrs_db: snrs.to_vec(),
        duration_s: 3.0,
        ..SynthSection::default()
    }
}

pub fn synth(dir: &Path, suite: &SynthSection, seed: u64) -> PathBuf {
    synth_fixtures(dir, suite, seed).unwrap()
}

pub fn config(jobs: usize) -> RunConfig {
    RunConfig {
        jobs,
        ..RunConfig::default()
    }
}
