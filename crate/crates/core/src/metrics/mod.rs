//! Objective scores: STOI intelligibility and inter-channel level/phase
//! deviation between two versions of a B-format scene.

mod spatial;
mod stoi;

pub use spatial::{
    bin_level_dbfs, icld_icpd_deviation, spatial_deviation, SpatialDeviation, DEFAULT_FLOOR_DBFS,
};
pub use stoi::{stoi, third_octave_bands, StoiScore, STOI_RATE_HZ};
