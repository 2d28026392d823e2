//! The two enhancement families under comparison.
//!
//! * SISO: a magnitude-domain spectral gain applied with the noisy phase
//!   passed through unchanged ([`enhance_siso`]), run on each B-format
//!   channel ([`enhance_multichannel`]).
//! * MISO: NCC-based integer-delay alignment followed by delay-and-sum
//!   ([`ncc_align`], [`delay_sum_beamform`]), which collapses the scene to
//!   one channel.

mod beamform;
mod mask;

pub use beamform::{delay_sum_beamform, ncc_align, ncc_curve, Alignment, BeamformerParams};
pub use mask::{
    apply_mask, compute_mask, enhance_multichannel, enhance_multichannel_detailed, enhance_siso,
    enhance_siso_detailed, enhance_siso_with_noise, estimate_noise_psd, ChannelMode, GainMask,
    MaskParams, MultichannelEnhancement, SisoEnhancement,
};
