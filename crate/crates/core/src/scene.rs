//! B-format scene construction: plane-wave encoding, RIR application,
//! SNR-controlled mixing and steering a scene back to a mono signal.
//!
//! Convention: channel order W, X, Y, Z; W carries the pressure signal
//! scaled by `w_gain` (traditional B-format uses 1/√2, SN3D uses 1).
//! Azimuth is counter-clockwise from +X in `[-180, 180)`, elevation is up
//! from the horizontal plane in `[-90, 90]`.

use crate::dsp::{fft_convolve, AudioBuffer};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Traditional B-format W scaling.
pub const DEFAULT_W_GAIN: f64 = std::f64::consts::FRAC_1_SQRT_2;
/// Cardioid steering pattern.
pub const DEFAULT_PATTERN: f64 = 0.5;

pub const W: usize = 0;
pub const X: usize = 1;
pub const Y: usize = 2;
pub const Z: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth_deg: f64,
    elevation_deg: f64,
}

fn wrap_azimuth(az: f64) -> f64 {
    let wrapped = az - 360.0 * ((az + 180.0) / 360.0).floor();
    // Guard the open upper bound against rounding.
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

impl Direction {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if !(-180.0..180.0).contains(&azimuth_deg) || !(-90.0..=90.0).contains(&elevation_deg) {
            return Err(Error::InvalidParam(format!(
                "direction ({azimuth_deg}, {elevation_deg}) out of range"
            )));
        }
        Ok(Self {
            azimuth_deg,
            elevation_deg,
        })
    }

    /// Folds any finite angle pair into the canonical ranges. Elevations
    /// past a pole continue on the opposite meridian.
    pub fn normalized(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if !azimuth_deg.is_finite() || !elevation_deg.is_finite() {
            return Err(Error::InvalidParam("non-finite angle".into()));
        }
        let mut el = elevation_deg - 360.0 * ((elevation_deg + 180.0) / 360.0).floor();
        let mut az = azimuth_deg;
        if el > 90.0 {
            el = 180.0 - el;
            az += 180.0;
        } else if el < -90.0 {
            el = -180.0 - el;
            az += 180.0;
        }
        Self::new(wrap_azimuth(az), el)
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        spherical_to_cartesian(self)
    }

    pub fn antipode(&self) -> Self {
        Self::normalized(self.azimuth_deg + 180.0, -self.elevation_deg)
            .expect("finite angles normalize")
    }
}

pub fn spherical_to_cartesian(dir: &Direction) -> [f64; 3] {
    let (az, el) = (dir.azimuth_deg.to_radians(), dir.elevation_deg.to_radians());
    [az.cos() * el.cos(), az.sin() * el.cos(), el.sin()]
}

/// Any non-zero vector; the length is discarded.
pub fn cartesian_to_spherical(v: [f64; 3]) -> Result<Direction> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let [x, y, z] = v.map(|c| c / norm);
    let az = y.atan2(x).to_degrees();
    let el = z.atan2(x.hypot(y)).to_degrees();
    Direction::new(wrap_azimuth(az), el.clamp(-90.0, 90.0))
}

/// Four synchronized channels W, X, Y, Z.
#[derive(Debug, Clone, PartialEq)]
pub struct BFormatScene<T = f64> {
    channels: [AudioBuffer<T>; 4],
}

impl<T: Real> BFormatScene<T> {
    pub fn new(channels: [AudioBuffer<T>; 4]) -> Result<Self> {
        let len = channels[0].len();
        let rate = channels[0].sample_rate_hz();
        for c in &channels[1..] {
            if c.sample_rate_hz() != rate {
                return Err(Error::RateMismatch(rate, c.sample_rate_hz()));
            }
            if c.len() != len {
                return Err(Error::LengthMismatch(len, c.len()));
            }
        }
        Ok(Self { channels })
    }

    pub fn from_vec(channels: Vec<AudioBuffer<T>>) -> Result<Self> {
        let arr: [AudioBuffer<T>; 4] = channels.try_into().map_err(|v: Vec<_>| {
            Error::InvalidParam(format!("B-format needs 4 channels, got {}", v.len()))
        })?;
        Self::new(arr)
    }

    pub fn w(&self) -> &AudioBuffer<T> {
        &self.channels[W]
    }

    pub fn x(&self) -> &AudioBuffer<T> {
        &self.channels[X]
    }

    pub fn y(&self) -> &AudioBuffer<T> {
        &self.channels[Y]
    }

    pub fn z(&self) -> &AudioBuffer<T> {
        &self.channels[Z]
    }

    pub fn channels(&self) -> &[AudioBuffer<T>; 4] {
        &self.channels
    }

    pub fn into_channels(self) -> [AudioBuffer<T>; 4] {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.channels[0].sample_rate_hz()
    }

    pub fn map_channels(&self, f: impl Fn(&AudioBuffer<T>) -> Result<AudioBuffer<T>>) -> Result<Self> {
        let [a, b, c, d] = &self.channels;
        Self::new([f(a)?, f(b)?, f(c)?, f(d)?])
    }

    pub fn scaled(&self, gain: T) -> Result<Self> {
        self.map_channels(|c| c.scaled(gain))
    }

    pub fn resized(&self, len: usize) -> Self {
        Self {
            channels: self.channels.clone().map(|c| c.resized(len)),
        }
    }
}

/// Four impulse responses, one per B-format channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RirSet<T = f64> {
    taps: [Vec<T>; 4],
    rate_hz: u32,
}

impl<T: Real> RirSet<T> {
    pub fn new(taps: [Vec<T>; 4], rate_hz: u32) -> Result<Self> {
        if rate_hz == 0 {
            return Err(Error::ZeroRate);
        }
        let len = taps[0].len();
        if len == 0 {
            return Err(Error::EmptySignal);
        }
        for t in &taps {
            if t.len() != len {
                return Err(Error::LengthMismatch(len, t.len()));
            }
            if let Some(index) = t.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self { taps, rate_hz })
    }

    /// Loads the four channels of a B-format WAV recording as taps.
    pub fn from_scene(scene: &BFormatScene<T>) -> Result<Self> {
        Self::new(
            scene.channels().clone().map(|c| c.into_samples()),
            scene.sample_rate_hz(),
        )
    }

    pub fn taps(&self) -> &[Vec<T>; 4] {
        &self.taps
    }

    pub fn rate_hz(&self) -> u32 {
        self.rate_hz
    }

    pub fn len(&self) -> usize {
        self.taps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn foa_gains(dir: &Direction, w_gain: f64) -> [f64; 4] {
    let [x, y, z] = dir.unit_vector();
    [w_gain, x, y, z]
}

/// Anechoic first-order encoding of a mono source arriving from `dir`.
pub fn encode_plane_wave<T: Real>(
    mono: &AudioBuffer<T>,
    dir: &Direction,
    w_gain: f64,
) -> Result<BFormatScene<T>> {
    mono.require_non_empty()?;
    let gains = foa_gains(dir, w_gain);
    BFormatScene::new(gains.map(|g| mono.scaled(T::lit(g)).expect("finite gain")))
}

/// `S(t) = x(t) * H(t)`, channel by channel.
pub fn apply_rir<T: Real>(mono: &AudioBuffer<T>, rir: &RirSet<T>) -> Result<BFormatScene<T>> {
    if mono.sample_rate_hz() != rir.rate_hz() {
        return Err(Error::RateMismatch(mono.sample_rate_hz(), rir.rate_hz()));
    }
    let [a, b, c, d] = rir.taps();
    BFormatScene::new([
        fft_convolve(mono, a)?,
        fft_convolve(mono, b)?,
        fft_convolve(mono, c)?,
        fft_convolve(mono, d)?,
    ])
}

/// Gain `g` such that the W-channel SNR of `speech` against `g · noise`,
/// measured over the samples both scenes share, equals `snr_db`.
pub fn noise_gain_for_snr<T: Real>(
    speech: &BFormatScene<T>,
    noise: &BFormatScene<T>,
    snr_db: f64,
) -> Result<f64> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidParam(format!("snr_db = {snr_db}")));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    let overlap = speech.len().min(noise.len());
    let energy = |b: &AudioBuffer<T>| -> f64 {
        b.samples()[..overlap]
            .iter()
            .map(|v| v.as_f64() * v.as_f64())
            .sum()
    };
    let es = energy(speech.w());
    let en = energy(noise.w());
    if en == 0.0 {
        return Err(Error::SilentNoise);
    }
    Ok((es / (en * 10f64.powf(snr_db / 10.0))).sqrt())
}

/// `Y(t) = S(t) + g · N(t)`; `snr_db = +∞` returns the speech unchanged
/// (zero-padded to the longer length).
pub fn mix_scene<T: Real>(
    speech: &BFormatScene<T>,
    noise: &BFormatScene<T>,
    snr_db: f64,
) -> Result<BFormatScene<T>> {
    if speech.sample_rate_hz() != noise.sample_rate_hz() {
        return Err(Error::RateMismatch(
            speech.sample_rate_hz(),
            noise.sample_rate_hz(),
        ));
    }
    let len = speech.len().max(noise.len());
    let g = noise_gain_for_snr(speech, noise, snr_db)?;
    if g == 0.0 {
        return Ok(speech.resized(len));
    }
    let g = T::lit(g);
    let s = speech.resized(len);
    let n = noise.resized(len);
    let mixed: Vec<AudioBuffer<T>> = s
        .channels()
        .iter()
        .zip(n.channels())
        .map(|(a, b)| {
            AudioBuffer::new(
                a.samples()
                    .iter()
                    .zip(b.samples())
                    .map(|(&u, &v)| u + g * v)
                    .collect(),
                a.sample_rate_hz(),
            )
        })
        .collect::<Result<_>>()?;
    BFormatScene::from_vec(mixed)
}

/// First-order virtual microphone `p·W/w_gain + (1-p)·(u · [X, Y, Z])`.
///
/// For a plane wave encoded with the same `w_gain` the response is
/// `p + (1-p)·cos γ`, γ being the angle between `dir` and the source, so
/// on-axis gain is exactly one.
pub fn steer_to_mono<T: Real>(
    scene: &BFormatScene<T>,
    dir: &Direction,
    pattern_p: f64,
    w_gain: f64,
) -> Result<AudioBuffer<T>> {
    if !(0.0..=1.0).contains(&pattern_p) {
        return Err(Error::InvalidParam(format!(
            "pattern_p {pattern_p} outside [0, 1]"
        )));
    }
    if !(w_gain > 0.0) || !w_gain.is_finite() {
        return Err(Error::InvalidParam(format!("w_gain {w_gain}")));
    }
    let [ux, uy, uz] = dir.unit_vector();
    let coef = [
        pattern_p / w_gain,
        (1.0 - pattern_p) * ux,
        (1.0 - pattern_p) * uy,
        (1.0 - pattern_p) * uz,
    ]
    .map(T::lit);
    let ch = scene.channels();
    let out = (0..scene.len())
        .map(|i| {
            coef[0] * ch[W].samples()[i]
                + coef[1] * ch[X].samples()[i]
                + coef[2] * ch[Y].samples()[i]
                + coef[3] * ch[Z].samples()[i]
        })
        .collect();
    AudioBuffer::new(out, scene.sample_rate_hz())
}
