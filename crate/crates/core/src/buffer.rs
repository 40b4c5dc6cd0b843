use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BufferError {
    #[error("sample rate must be positive")]
    ZeroSampleRate,
}

/// Mono audio: normalized samples plus their sample rate.
///
/// Decoders keep every sample within `[-1.0, 1.0]`; encoders hard-clip
/// anything outside that range.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f32>,
    sample_rate_hz: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self, BufferError> {
        if sample_rate_hz == 0 {
            return Err(BufferError::ZeroSampleRate);
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }

    /// Replaces the samples, keeping the sample rate.
    pub fn with_samples(&self, samples: Vec<f32>) -> Self {
        Self {
            samples,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Sum of squared samples.
    ///
    /// Squares are exact in `f64` and summed in sorted order, so the result
    /// depends only on the multiset of samples, not their order.
    pub fn energy(&self) -> f64 {
        let mut squares: Vec<f64> = self.samples.iter().map(|&s| f64::from(s) * f64::from(s)).collect();
        squares.sort_unstable_by(f64::total_cmp);
        squares.iter().sum()
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_zero_rate() {
        assert_eq!(AudioBuffer::new(vec![0.0], 0), Err(BufferError::ZeroSampleRate));
    }

    #[test]
    fn energy_is_order_independent() {
        let a = AudioBuffer::new(vec![0.1, -0.7, 0.3, 1e-6, 0.25], 8000).unwrap();
        let b = a.with_samples(vec![1e-6, 0.25, 0.3, 0.1, -0.7]);
        assert_eq!(a.energy().to_bits(), b.energy().to_bits());
        assert_eq!(a.peak(), 0.7);
    }
}
