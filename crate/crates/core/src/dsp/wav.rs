//! Little-endian RIFF/WAVE reader and writer for PCM16 and IEEE float32.
//!
//! 16-bit convention: reading maps `i16` to `v / 32768.0`, so full scale is
//! `[-1.0, 1.0)`. Writing multiplies by 32768, rounds half away from zero
//! and clamps to `[-32768, 32767]`. A PCM16 write/read cycle therefore
//! reproduces any buffer that came from a PCM16 read bit-exactly.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::AudioBuffer;
use crate::error::Result;
use crate::scalar::Real;

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing or malformed `{0}` chunk")]
    MissingChunk(&'static str),
    #[error("`{0}` chunk is truncated")]
    Truncated(&'static str),
    #[error("unsupported codec: format tag {format_tag:#06x}, {bits} bits")]
    Unsupported { format_tag: u16, bits: u16 },
    #[error("channel count is zero")]
    ZeroChannels,
    #[error("invalid channel set: {0}")]
    InvalidChannels(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitDepth {
    #[default]
    Pcm16,
    Float32,
}

struct Format {
    tag: u16,
    channels: u16,
    rate: u32,
    block_align: u16,
    bits: u16,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> std::result::Result<Format, WavError> {
    if body.len() < 16 {
        return Err(WavError::Truncated("fmt "));
    }
    let mut tag = u16_at(body, 0);
    let bits = u16_at(body, 14);
    if tag == FORMAT_EXTENSIBLE {
        if body.len() < 26 {
            return Err(WavError::Truncated("fmt "));
        }
        // First two bytes of the sub-format GUID carry the real tag.
        tag = u16_at(body, 24);
    }
    Ok(Format {
        tag,
        channels: u16_at(body, 2),
        rate: u32_at(body, 4),
        block_align: u16_at(body, 12),
        bits,
    })
}

/// Decodes an in-memory WAV file into one buffer per channel.
pub fn decode_wav<T: Real>(bytes: &[u8]) -> Result<Vec<AudioBuffer<T>>> {
    if bytes.len() < 8 || &bytes[0..4] != b"RIFF" {
        return Err(WavError::MissingChunk("RIFF").into());
    }
    if bytes.len() < 12 || &bytes[8..12] != b"WAVE" {
        return Err(WavError::MissingChunk("WAVE").into());
    }
    let mut fmt = None;
    let mut data = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let size = u32_at(bytes, at + 4) as usize;
        let body_start = at + 8;
        let body_end = body_start.checked_add(size).unwrap_or(usize::MAX);
        match id {
            b"fmt " => {
                if body_end > bytes.len() {
                    return Err(WavError::Truncated("fmt ").into());
                }
                fmt = Some(parse_fmt(&bytes[body_start..body_end])?);
            }
            b"data" => {
                if body_end > bytes.len() {
                    return Err(WavError::Truncated("data").into());
                }
                data = Some(&bytes[body_start..body_end]);
            }
            _ => {}
        }
        at = body_end.saturating_add(size & 1);
    }
    let fmt = fmt.ok_or(WavError::MissingChunk("fmt "))?;
    let data = data.ok_or(WavError::MissingChunk("data"))?;
    if fmt.channels == 0 {
        return Err(WavError::ZeroChannels.into());
    }
    let width = match (fmt.tag, fmt.bits) {
        (FORMAT_PCM, 16) => 2,
        (FORMAT_FLOAT, 32) => 4,
        (format_tag, bits) => return Err(WavError::Unsupported { format_tag, bits }.into()),
    };
    let channels = fmt.channels as usize;
    let block = width * channels;
    if fmt.block_align as usize != block {
        return Err(WavError::MissingChunk("fmt ").into());
    }
    if data.len() % block != 0 {
        return Err(WavError::Truncated("data").into());
    }
    let frames = data.len() / block;
    let mut out = vec![Vec::with_capacity(frames); channels];
    for frame in data.chunks_exact(block) {
        for (ch, sample) in frame.chunks_exact(width).enumerate() {
            let v = if width == 2 {
                f64::from(i16::from_le_bytes([sample[0], sample[1]])) / 32768.0
            } else {
                f64::from(f32::from_le_bytes([sample[0], sample[1], sample[2], sample[3]]))
            };
            out[ch].push(T::lit(v));
        }
    }
    out.into_iter()
        .map(|s| AudioBuffer::new(s, fmt.rate))
        .collect()
}

pub fn read_wav<T: Real>(path: impl AsRef<Path>) -> Result<Vec<AudioBuffer<T>>> {
    let bytes = fs::read(path).map_err(WavError::Io)?;
    decode_wav(&bytes)
}

fn quantize_pcm16(v: f64) -> i16 {
    // f64::round rounds half away from zero.
    (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Encodes equal-length, equal-rate channels as an interleaved WAV file.
pub fn encode_wav<T: Real>(channels: &[AudioBuffer<T>], depth: BitDepth) -> Result<Vec<u8>> {
    let first = channels.first().ok_or(WavError::ZeroChannels)?;
    let rate = first.sample_rate_hz();
    let frames = first.len();
    if channels
        .iter()
        .any(|c| c.len() != frames || c.sample_rate_hz() != rate)
    {
        return Err(WavError::InvalidChannels("channels differ in length or rate".into()).into());
    }
    if channels.len() > u16::MAX as usize {
        return Err(WavError::InvalidChannels(format!("{} channels", channels.len())).into());
    }
    let (tag, width) = match depth {
        BitDepth::Pcm16 => (FORMAT_PCM, 2usize),
        BitDepth::Float32 => (FORMAT_FLOAT, 4usize),
    };
    let block = width * channels.len();
    let data_len = block * frames;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&(channels.len() as u16).to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * block as u32).to_le_bytes());
    out.extend_from_slice(&(block as u16).to_le_bytes());
    out.extend_from_slice(&((width * 8) as u16).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for i in 0..frames {
        for ch in channels {
            let v = ch.samples()[i].as_f64();
            match depth {
                BitDepth::Pcm16 => out.extend_from_slice(&quantize_pcm16(v).to_le_bytes()),
                BitDepth::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            }
        }
    }
    if data_len % 2 == 1 {
        out.push(0);
    }
    Ok(out)
}

pub fn write_wav<T: Real>(
    path: impl AsRef<Path>,
    channels: &[AudioBuffer<T>],
    depth: BitDepth,
) -> Result<()> {
    let bytes = encode_wav(channels, depth)?;
    fs::write(path, bytes).map_err(WavError::Io)?;
    Ok(())
}
