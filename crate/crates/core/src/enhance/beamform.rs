use crate::dsp::AudioBuffer;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamformerParams {
    pub window_ms: f64,
    pub max_lag_samples: usize,
    pub ref_channel: usize,
}

impl Default for BeamformerParams {
    fn default() -> Self {
        Self {
            window_ms: 16.0,
            max_lag_samples: 32,
            ref_channel: 0,
        }
    }
}

impl BeamformerParams {
    pub fn window_len(&self, rate_hz: u32) -> usize {
        (self.window_ms * rate_hz as f64 / 1000.0).round() as usize
    }

    pub fn validate(&self, rate_hz: u32) -> Result<()> {
        if !(self.window_ms > 0.0) || !self.window_ms.is_finite() {
            return Err(Error::InvalidParam(format!("window_ms {}", self.window_ms)));
        }
        if self.max_lag_samples == 0 {
            return Err(Error::InvalidParam("max_lag_samples must be positive".into()));
        }
        let win = self.window_len(rate_hz);
        if self.max_lag_samples >= win {
            return Err(Error::InvalidParam(format!(
                "max_lag_samples {} must be below the {win}-sample window",
                self.max_lag_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Lag of each channel behind the reference, in samples; the reference
    /// itself is 0.
    pub delays: Vec<isize>,
    /// Channels with no energy (or a silent reference); their delay is 0.
    pub degenerate: Vec<bool>,
    /// Summed NCC at the chosen lag.
    pub peak: Vec<f64>,
}

impl Alignment {
    pub fn has_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }
}

/// NCC between `reference[n]` and `channel[n + d]` for `d` in
/// `-max_lag..=max_lag`, summed over consecutive non-overlapping windows of
/// the reference. Index `i` of the result holds lag `i - max_lag`.
///
/// Samples of `channel` outside the signal count as zero; a window whose
/// reference or shifted channel has no energy contributes nothing.
pub fn ncc_curve<T: Real>(
    reference: &[T],
    channel: &[T],
    window_len: usize,
    max_lag: usize,
) -> Vec<f64> {
    let len = reference.len().min(channel.len());
    let window_len = window_len.max(1);
    let windows = (len / window_len).max(1);
    let lag = max_lag as isize;
    let mut curve = vec![0.0; 2 * max_lag + 1];
    for k in 0..windows {
        let start = k * window_len;
        let end = (start + window_len).min(len);
        let ref_energy: f64 = reference[start..end]
            .iter()
            .map(|v| v.as_f64() * v.as_f64())
            .sum();
        if ref_energy == 0.0 {
            continue;
        }
        for (slot, d) in curve.iter_mut().zip(-lag..=lag) {
            let lo = (start as isize).max(-d) as usize;
            let hi = (end as isize).min(len as isize - d).max(lo as isize) as usize;
            let mut cross = 0.0;
            let mut ch_energy = 0.0;
            for n in lo..hi {
                let c = channel[(n as isize + d) as usize].as_f64();
                cross += reference[n].as_f64() * c;
                ch_energy += c * c;
            }
            if ch_energy > 0.0 {
                *slot += cross / (ref_energy * ch_energy).sqrt();
            }
        }
    }
    curve
}

/// Integer delay of each channel relative to `ref_channel`, picked as the
/// first maximum of the summed windowed NCC curve.
pub fn ncc_align<T: Real>(channels: &[AudioBuffer<T>], params: &BeamformerParams) -> Result<Alignment> {
    if channels.len() < 2 {
        return Err(Error::InvalidParam(format!(
            "alignment needs at least 2 channels, got {}",
            channels.len()
        )));
    }
    let rate = channels[0].sample_rate_hz();
    let len = channels[0].len();
    for c in channels {
        if c.sample_rate_hz() != rate {
            return Err(Error::RateMismatch(rate, c.sample_rate_hz()));
        }
        if c.len() != len {
            return Err(Error::LengthMismatch(len, c.len()));
        }
    }
    if params.ref_channel >= channels.len() {
        return Err(Error::InvalidParam(format!(
            "ref_channel {} out of {} channels",
            params.ref_channel,
            channels.len()
        )));
    }
    params.validate(rate)?;
    let win = params.window_len(rate);
    let max_lag = params.max_lag_samples;
    let reference = channels[params.ref_channel].samples();
    let ref_silent = reference.iter().all(|v| *v == T::zero());

    let mut out = Alignment {
        delays: vec![0; channels.len()],
        degenerate: vec![false; channels.len()],
        peak: vec![0.0; channels.len()],
    };
    for (i, ch) in channels.iter().enumerate() {
        let silent = ch.samples().iter().all(|v| *v == T::zero());
        if silent || ref_silent {
            out.degenerate[i] = true;
            continue;
        }
        let curve = ncc_curve(reference, ch.samples(), win, max_lag);
        if i == params.ref_channel {
            out.peak[i] = curve[max_lag];
            continue;
        }
        let (best, value) = curve
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (j, &v)| {
                if v > bv {
                    (j, v)
                } else {
                    (bi, bv)
                }
            });
        out.delays[i] = best as isize - max_lag as isize;
        out.peak[i] = value;
    }
    Ok(out)
}

/// Advances each channel by its delay (zero fill) and averages.
pub fn delay_sum_beamform<T: Real>(channels: &[AudioBuffer<T>], delays: &[isize]) -> Result<AudioBuffer<T>> {
    let first = channels.first().ok_or(Error::EmptySignal)?;
    if delays.len() != channels.len() {
        return Err(Error::LengthMismatch(delays.len(), channels.len()));
    }
    let len = first.len();
    let rate = first.sample_rate_hz();
    for c in channels {
        if c.len() != len {
            return Err(Error::LengthMismatch(len, c.len()));
        }
        if c.sample_rate_hz() != rate {
            return Err(Error::RateMismatch(rate, c.sample_rate_hz()));
        }
    }
    let mut out = vec![T::zero(); len];
    for (c, &d) in channels.iter().zip(delays) {
        let x = c.samples();
        for (n, o) in out.iter_mut().enumerate() {
            let src = n as isize + d;
            if (0..len as isize).contains(&src) {
                *o = *o + x[src as usize];
            }
        }
    }
    let scale = T::one() / T::from_usize_lossy(channels.len());
    out.iter_mut().for_each(|v| *v = *v * scale);
    AudioBuffer::new(out, rate)
}
