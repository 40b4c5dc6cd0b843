//! Log-mel filterbank front-end, per-utterance mean/variance normalization,
//! and the distortion measures used to compare LTR renderings.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::buffer::AudioBuffer;
use crate::fft::magnitude_spectrum;
use crate::ltr::LtrConfig;

/// Floor applied to filterbank energies before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;
pub const PREEMPHASIS: f64 = 0.97;
const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("{len} samples is shorter than one {window}-sample window")]
    TooShort { len: usize, window: usize },
    #[error("values length {len} does not match {frames} x {dims}")]
    InvalidShape { len: usize, frames: usize, dims: usize },
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("invalid front-end configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("boundary analysis needs at least two segments ({len} samples, segment {segment})")]
    TooFewSegments { len: usize, segment: usize },
}

/// Window and hop of the frames a matrix was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Framing {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
}

/// Row-major `frames x dims` matrix of real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    frames: usize,
    dims: usize,
    framing: Option<Framing>,
}

impl FeatureMatrix {
    pub fn new(values: Vec<f64>, frames: usize, dims: usize) -> Result<Self, FeatureError> {
        if frames.checked_mul(dims) != Some(values.len()) {
            return Err(FeatureError::InvalidShape {
                len: values.len(),
                frames,
                dims,
            });
        }
        Ok(Self {
            values,
            frames,
            dims,
            framing: None,
        })
    }

    pub fn with_framing(mut self, framing: Framing) -> Self {
        self.framing = Some(framing);
        self
    }

    pub fn framing(&self) -> Option<Framing> {
        self.framing
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.dims)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, frame: usize, dim: usize) -> f64 {
        self.values[frame * self.dims + dim]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.dims..(frame + 1) * self.dims]
    }

    pub fn row_mut(&mut self, frame: usize) -> &mut [f64] {
        &mut self.values[frame * self.dims..(frame + 1) * self.dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.dims.max(1)).take(self.frames)
    }
}

/// Front-end parameters. Defaults: 80 bands, 25 ms Hamming window, 10 ms hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontEnd {
    pub dims: usize,
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
}

impl Default for FrontEnd {
    fn default() -> Self {
        Self {
            dims: 80,
            frame_length_ms: 25.0,
            frame_shift_ms: 10.0,
        }
    }
}

impl FrontEnd {
    pub fn window_samples(&self, sample_rate_hz: u32) -> usize {
        libm::round(self.frame_length_ms * f64::from(sample_rate_hz) / 1000.0) as usize
    }

    pub fn hop_samples(&self, sample_rate_hz: u32) -> usize {
        libm::round(self.frame_shift_ms * f64::from(sample_rate_hz) / 1000.0) as usize
    }

    fn validate(&self, sample_rate_hz: u32) -> Result<(usize, usize), FeatureError> {
        if self.dims == 0 {
            return Err(FeatureError::InvalidConfig("dims must be positive"));
        }
        if !(self.frame_length_ms > 0.0 && self.frame_shift_ms > 0.0) {
            return Err(FeatureError::InvalidConfig("window and shift must be positive"));
        }
        let (win, hop) = (self.window_samples(sample_rate_hz), self.hop_samples(sample_rate_hz));
        if win < 2 || hop == 0 {
            return Err(FeatureError::InvalidConfig("window or shift rounds to too few samples"));
        }
        Ok((win, hop))
    }

    /// `1 + floor((len - window) / hop)`, or `None` when shorter than a window.
    pub fn frame_count(&self, len: usize, sample_rate_hz: u32) -> Option<usize> {
        let (win, hop) = (self.window_samples(sample_rate_hz), self.hop_samples(sample_rate_hz));
        (len >= win && hop > 0).then(|| 1 + (len - win) / hop)
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * libm::log10(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (libm::pow(10.0, mel / 2595.0) - 1.0)
}

/// Triangular filters evenly spaced on the mel scale from 0 Hz to Nyquist.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    edges_hz: Vec<f64>,
    weights: Vec<Vec<(usize, f64)>>,
}

impl MelFilterbank {
    pub fn new(bands: usize, fft_size: usize, sample_rate_hz: u32) -> Self {
        let nyquist = f64::from(sample_rate_hz) / 2.0;
        let top = hz_to_mel(nyquist);
        let edges_hz: Vec<f64> = (0..bands + 2)
            .map(|i| mel_to_hz(top * i as f64 / (bands + 1) as f64))
            .collect();
        let bin_hz = f64::from(sample_rate_hz) / fft_size as f64;
        let weights = (0..bands)
            .map(|m| {
                let (lo, mid, hi) = (edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]);
                (0..=fft_size / 2)
                    .filter_map(|k| {
                        let f = k as f64 * bin_hz;
                        let w = if f > lo && f <= mid {
                            (f - lo) / (mid - lo)
                        } else if f > mid && f < hi {
                            (hi - f) / (hi - mid)
                        } else {
                            0.0
                        };
                        (w > 0.0).then_some((k, w))
                    })
                    .collect()
            })
            .collect();
        Self { edges_hz, weights }
    }

    pub fn bands(&self) -> usize {
        self.weights.len()
    }

    /// `(low, center, high)` edge frequencies of band `m` in Hz.
    pub fn band_edges_hz(&self, m: usize) -> (f64, f64, f64) {
        (self.edges_hz[m], self.edges_hz[m + 1], self.edges_hz[m + 2])
    }

    pub fn apply(&self, spectrum: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|band| band.iter().map(|&(k, w)| w * spectrum[k]).sum())
            .collect()
    }
}

fn hamming(len: usize) -> Vec<f64> {
    let denom = (len - 1) as f64;
    (0..len)
        .map(|i| 0.54 - 0.46 * libm::cos(2.0 * PI * i as f64 / denom))
        .collect()
}

/// Log-mel filterbank energies, unnormalized.
///
/// Each frame is pre-emphasized (0.97, first sample scaled by 0.03),
/// Hamming-windowed and zero-padded to the next power of two before the
/// magnitude spectrum is pooled by the mel filters. Energies are floored at
/// [`LOG_FLOOR`] before the natural log.
pub fn fbank(buffer: &AudioBuffer, front_end: &FrontEnd) -> Result<FeatureMatrix, FeatureError> {
    let rate = buffer.sample_rate_hz();
    let (win, hop) = front_end.validate(rate)?;
    let samples = buffer.samples();
    let frames = front_end
        .frame_count(samples.len(), rate)
        .ok_or(FeatureError::TooShort {
            len: samples.len(),
            window: win,
        })?;
    let fft_size = win.next_power_of_two();
    let window = hamming(win);
    let bank = MelFilterbank::new(front_end.dims, fft_size, rate);

    let mut values = Vec::with_capacity(frames * front_end.dims);
    let mut frame = vec![0.0; win];
    for t in 0..frames {
        let src = &samples[t * hop..t * hop + win];
        for i in (1..win).rev() {
            frame[i] = f64::from(src[i]) - PREEMPHASIS * f64::from(src[i - 1]);
        }
        frame[0] = f64::from(src[0]) * (1.0 - PREEMPHASIS);
        frame.iter_mut().zip(&window).for_each(|(x, w)| *x *= w);
        let spectrum = magnitude_spectrum(&frame, fft_size);
        values.extend(bank.apply(&spectrum).into_iter().map(|e| libm::log(e.max(LOG_FLOOR))));
    }
    Ok(
        FeatureMatrix::new(values, frames, front_end.dims)?.with_framing(Framing {
            frame_length_ms: front_end.frame_length_ms,
            frame_shift_ms: front_end.frame_shift_ms,
        }),
    )
}

/// Per-utterance, per-coefficient mean and variance normalization.
///
/// Columns with standard deviation below 1e-8 are only mean-centred.
pub fn mvn(features: &FeatureMatrix) -> FeatureMatrix {
    let (frames, dims) = features.shape();
    if frames == 0 {
        return features.clone();
    }
    let n = frames as f64;
    let mut mean = vec![0.0; dims];
    for row in features.rows() {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dims];
    for row in features.rows() {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let scale: Vec<f64> = var.iter().map(|s| libm::sqrt(s / n).max(STD_FLOOR)).collect();

    let mut out = features.clone();
    for t in 0..frames {
        for ((v, m), s) in out.row_mut(t).iter_mut().zip(&mean).zip(&scale) {
            *v = (*v - m) / s;
        }
    }
    out
}

/// Summary of sample jumps at segment boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryReport {
    /// Mean of `|s[kL] - s[kL-1]|` over interior boundaries.
    pub mean_jump: f64,
    /// Number of interior boundaries.
    pub boundaries: usize,
    /// Number of segments, counting a trailing partial one.
    pub segments: usize,
    /// Segments started per second of audio.
    pub events_per_second: f64,
}

pub fn boundary_report(buffer: &AudioBuffer, config: &LtrConfig) -> Result<BoundaryReport, FeatureError> {
    let s = buffer.samples();
    let seg = config.segment_samples();
    if s.len() <= seg {
        return Err(FeatureError::TooFewSegments {
            len: s.len(),
            segment: seg,
        });
    }
    let jumps: Vec<f64> = (seg..s.len())
        .step_by(seg)
        .map(|b| (f64::from(s[b]) - f64::from(s[b - 1])).abs())
        .collect();
    let segments = s.len().div_ceil(seg);
    Ok(BoundaryReport {
        mean_jump: jumps.iter().sum::<f64>() / jumps.len() as f64,
        boundaries: jumps.len(),
        segments,
        events_per_second: (segments as f64 * f64::from(buffer.sample_rate_hz())) / s.len() as f64,
    })
}

/// Mean absolute sample jump across segment boundaries of `buffer`.
pub fn boundary_discontinuity(buffer: &AudioBuffer, config: &LtrConfig) -> Result<f64, FeatureError> {
    boundary_report(buffer, config).map(|r| r.mean_jump)
}

/// Root-mean-square cell difference of two equally shaped matrices.
pub fn spectral_distance(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<f64, FeatureError> {
    if a.shape() != b.shape() {
        return Err(FeatureError::ShapeMismatch(a.shape(), b.shape()));
    }
    if a.values().is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(libm::sqrt(sum / a.values().len() as f64))
}
