//! Local time reversal: the waveform is cut into consecutive fixed-length
//! segments starting at sample 0 and the samples of every segment are played
//! backwards while segment order is kept.
//!
//! A trailing segment shorter than the nominal length is reversed as it is,
//! which keeps the output length equal to the input length and makes the
//! operation an involution.

use alloc::vec::Vec;

use crate::buffer::AudioBuffer;

/// Segment durations rendered by default: 5 ms to 50 ms in 5 ms steps.
pub const DEFAULT_DURATIONS_MS: [f64; 10] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0];

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum LtrError {
    #[error("segment duration must be a positive finite number of milliseconds, got {0}")]
    InvalidDuration(f64),
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("cannot reverse an empty buffer")]
    EmptyBuffer,
}

/// Converts a segment duration to a sample count, rounding half away from
/// zero, never returning less than one sample.
pub fn segment_samples(segment_ms: f64, sample_rate_hz: u32) -> Result<usize, LtrError> {
    if !(segment_ms.is_finite() && segment_ms > 0.0) {
        return Err(LtrError::InvalidDuration(segment_ms));
    }
    if sample_rate_hz == 0 {
        return Err(LtrError::InvalidSampleRate);
    }
    let exact = segment_ms * f64::from(sample_rate_hz) / 1000.0;
    Ok((libm::round(exact) as usize).max(1))
}

/// Segment length for a given sample rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtrConfig {
    segment_ms: f64,
    segment_samples: usize,
}

impl LtrConfig {
    pub fn new(segment_ms: f64, sample_rate_hz: u32) -> Result<Self, LtrError> {
        Ok(Self {
            segment_ms,
            segment_samples: segment_samples(segment_ms, sample_rate_hz)?,
        })
    }

    /// Builds a config directly from a length in samples.
    pub fn from_samples(segment_samples: usize, sample_rate_hz: u32) -> Result<Self, LtrError> {
        if sample_rate_hz == 0 {
            return Err(LtrError::InvalidSampleRate);
        }
        if segment_samples == 0 {
            return Err(LtrError::InvalidDuration(0.0));
        }
        Ok(Self {
            segment_ms: segment_samples as f64 * 1000.0 / f64::from(sample_rate_hz),
            segment_samples,
        })
    }

    pub fn segment_ms(&self) -> f64 {
        self.segment_ms
    }

    pub fn segment_samples(&self) -> usize {
        self.segment_samples
    }
}

/// Reverses samples in place within each segment of `len` samples.
pub fn reverse_segments_in_place(samples: &mut [f32], len: usize) {
    debug_assert!(len > 0);
    samples.chunks_mut(len).for_each(<[f32]>::reverse);
}

pub fn reverse_segments(buffer: &AudioBuffer, config: &LtrConfig) -> Result<AudioBuffer, LtrError> {
    if buffer.is_empty() {
        return Err(LtrError::EmptyBuffer);
    }
    let mut samples = buffer.samples().to_vec();
    reverse_segments_in_place(&mut samples, config.segment_samples());
    Ok(buffer.with_samples(samples))
}

/// Renders one LTR version of `buffer` per duration, in the given order.
pub fn render_ltr_family(buffer: &AudioBuffer, durations_ms: &[f64]) -> Result<Vec<AudioBuffer>, LtrError> {
    durations_ms
        .iter()
        .map(|&ms| {
            let config = LtrConfig::new(ms, buffer.sample_rate_hz())?;
            reverse_segments(buffer, &config)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn buf(samples: Vec<f32>) -> AudioBuffer {
        AudioBuffer::new(samples, 16_000).unwrap()
    }

    #[test]
    fn duration_to_samples() {
        assert_eq!(segment_samples(5.0, 16_000), Ok(80));
        assert_eq!(segment_samples(25.0, 16_000), Ok(400));
        assert_eq!(segment_samples(20.0, 44_100), Ok(882));
        // 0.0625 ms at 8 kHz is exactly half a sample
        assert_eq!(segment_samples(0.0625, 8_000), Ok(1));
        assert_eq!(segment_samples(0.1875, 8_000), Ok(2));
        assert_eq!(segment_samples(0.001, 8_000), Ok(1));
        assert!(matches!(
            segment_samples(0.0, 16_000),
            Err(LtrError::InvalidDuration(_))
        ));
        assert!(matches!(
            segment_samples(-5.0, 16_000),
            Err(LtrError::InvalidDuration(_))
        ));
        assert!(matches!(
            segment_samples(f64::NAN, 16_000),
            Err(LtrError::InvalidDuration(_))
        ));
        assert_eq!(segment_samples(5.0, 0), Err(LtrError::InvalidSampleRate));
    }

    #[test]
    fn reverses_full_and_tail_segments() {
        let b = buf(vec![1., 2., 3., 4., 5., 6., 7.]);
        let c = LtrConfig::from_samples(3, 16_000).unwrap();
        let out = reverse_segments(&b, &c).unwrap();
        assert_eq!(out.samples(), &[3., 2., 1., 6., 5., 4., 7.]);
        assert_eq!(out.sample_rate_hz(), 16_000);

        let c = LtrConfig::from_samples(5, 16_000).unwrap();
        let out = reverse_segments(&b, &c).unwrap();
        assert_eq!(out.samples(), &[5., 4., 3., 2., 1., 7., 6.]);
    }

    #[test]
    fn unit_segment_is_identity() {
        let b = buf(vec![0.1, -0.2, 0.3]);
        let c = LtrConfig::from_samples(1, 16_000).unwrap();
        assert_eq!(reverse_segments(&b, &c).unwrap(), b);
    }

    #[test]
    fn long_segment_reverses_whole_signal() {
        let b = buf(vec![0.1, -0.2, 0.3, 0.4]);
        for len in [4, 5, 1000] {
            let c = LtrConfig::from_samples(len, 16_000).unwrap();
            assert_eq!(reverse_segments(&b, &c).unwrap().samples(), &[0.4, 0.3, -0.2, 0.1]);
        }
    }

    #[test]
    fn empty_buffer_is_rejected() {
        let c = LtrConfig::new(5.0, 16_000).unwrap();
        assert_eq!(reverse_segments(&buf(vec![]), &c), Err(LtrError::EmptyBuffer));
    }

    #[test]
    fn default_family() {
        let b = buf((0..3000).map(|i| (i as f32 * 0.01).sin()).collect());
        let family = render_ltr_family(&b, &DEFAULT_DURATIONS_MS).unwrap();
        assert_eq!(family.len(), 10);
        assert!(family.iter().all(|f| f.len() == b.len()));
        // 5 ms at 16 kHz is 80 samples
        assert_eq!(family[0].samples()[0], b.samples()[79]);

        assert!(render_ltr_family(&b, &[]).unwrap().is_empty());
        // 0.05 ms at 16 kHz rounds to one sample
        let ident = render_ltr_family(&b, &[0.05, 0.04]).unwrap();
        assert!(ident.iter().all(|f| f == &b));
        assert!(render_ltr_family(&b, &[5.0, -1.0]).is_err());
    }
}
