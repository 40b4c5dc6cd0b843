//! Comparison augmentations: speed perturbation on waveforms and
//! SpecAugment-style masking on feature matrices.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::buffer::AudioBuffer;
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerturbError {
    #[error("speed factor must be positive and finite, got {0}")]
    InvalidFactor(f64),
    #[error("speed factor {factor} leaves no samples from a {len}-sample input")]
    EmptyOutput { factor: f64, len: usize },
    #[error("input buffer is empty")]
    EmptyBuffer,
    #[error("feature matrix is empty")]
    EmptyFeatures,
    #[error("max time mask fraction must lie in [0, 1], got {0}")]
    InvalidTimeFraction(f64),
}

/// Playback-rate multipliers for an N-fold speed-perturbed set.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedFactors(Vec<f64>);

impl SpeedFactors {
    pub fn new(factors: Vec<f64>) -> Result<Self, PerturbError> {
        if let Some(&bad) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(PerturbError::InvalidFactor(bad));
        }
        Ok(Self(factors))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Default for SpeedFactors {
    fn default() -> Self {
        Self(vec![0.9, 1.0, 1.1])
    }
}

/// Output length of a speed change: `round(len / factor)`.
pub fn speed_output_len(len: usize, factor: f64) -> usize {
    libm::round(len as f64 / factor) as usize
}

/// Changes playback rate by resampling with linear interpolation.
///
/// Output sample `i` is the input evaluated at position `i * factor`;
/// positions past the last sample clamp to it. Pitch is not corrected.
pub fn speed_perturb(buffer: &AudioBuffer, factor: f64) -> Result<AudioBuffer, PerturbError> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(PerturbError::InvalidFactor(factor));
    }
    let input = buffer.samples();
    if input.is_empty() {
        return Err(PerturbError::EmptyBuffer);
    }
    let out_len = speed_output_len(input.len(), factor);
    if out_len == 0 {
        return Err(PerturbError::EmptyOutput {
            factor,
            len: input.len(),
        });
    }
    let last = input.len() - 1;
    let samples = (0..out_len)
        .map(|i| {
            let pos = i as f64 * factor;
            let idx = libm::floor(pos) as usize;
            if idx >= last {
                return input[last];
            }
            let frac = pos - idx as f64;
            let (a, b) = (f64::from(input[idx]), f64::from(input[idx + 1]));
            (a + frac * (b - a)) as f32
        })
        .collect();
    Ok(buffer.with_samples(samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskAxis {
    /// A band of coefficient columns across all frames.
    Frequency,
    /// A range of frames across all coefficients.
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mask {
    pub axis: MaskAxis,
    pub start: usize,
    pub width: usize,
}

/// Masking-only SpecAugment policy. Time warping is not supported.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecAugmentPolicy {
    pub num_freq_masks: usize,
    /// In mel bins; clamped to the matrix width when drawing.
    pub max_freq_mask_width: usize,
    pub num_time_masks: usize,
    /// Fraction of the frame count bounding each time mask.
    pub max_time_mask_fraction: f64,
    pub seed: u64,
}

impl SpecAugmentPolicy {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

impl Default for SpecAugmentPolicy {
    fn default() -> Self {
        Self {
            num_freq_masks: 2,
            max_freq_mask_width: 27,
            num_time_masks: 2,
            max_time_mask_fraction: 0.05,
            seed: 0,
        }
    }
}

/// Draws the masks a policy would apply to a `frames x dims` matrix.
///
/// Frequency masks are drawn first, then time masks, from one ChaCha8
/// stream seeded with `policy.seed`.
pub fn draw_masks(frames: usize, dims: usize, policy: &SpecAugmentPolicy) -> Result<Vec<Mask>, PerturbError> {
    let frac = policy.max_time_mask_fraction;
    if !(0.0..=1.0).contains(&frac) {
        return Err(PerturbError::InvalidTimeFraction(frac));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let mut masks = Vec::with_capacity(policy.num_freq_masks + policy.num_time_masks);
    let max_freq = policy.max_freq_mask_width.min(dims);
    for _ in 0..policy.num_freq_masks {
        let width = rng.gen_range(0..=max_freq);
        let start = rng.gen_range(0..=dims - width);
        masks.push(Mask {
            axis: MaskAxis::Frequency,
            start,
            width,
        });
    }
    let max_time = (libm::floor(frac * frames as f64) as usize).min(frames);
    for _ in 0..policy.num_time_masks {
        let width = rng.gen_range(0..=max_time);
        let start = rng.gen_range(0..=frames - width);
        masks.push(Mask {
            axis: MaskAxis::Time,
            start,
            width,
        });
    }
    Ok(masks)
}

/// Zeroes the cells covered by `mask`.
pub fn apply_mask(features: &mut FeatureMatrix, mask: &Mask) {
    match mask.axis {
        MaskAxis::Frequency => {
            let end = (mask.start + mask.width).min(features.dims());
            for t in 0..features.frames() {
                features.row_mut(t)[mask.start..end].fill(0.0);
            }
        }
        MaskAxis::Time => {
            let end = (mask.start + mask.width).min(features.frames());
            for t in mask.start..end {
                features.row_mut(t).fill(0.0);
            }
        }
    }
}

/// Applies a seeded SpecAugment policy and also returns the masks drawn.
pub fn spec_augment_with_masks(
    features: &FeatureMatrix,
    policy: &SpecAugmentPolicy,
) -> Result<(FeatureMatrix, Vec<Mask>), PerturbError> {
    if features.frames() == 0 || features.dims() == 0 {
        return Err(PerturbError::EmptyFeatures);
    }
    let masks = draw_masks(features.frames(), features.dims(), policy)?;
    let mut out = features.clone();
    for mask in &masks {
        apply_mask(&mut out, mask);
    }
    Ok((out, masks))
}

pub fn spec_augment(features: &FeatureMatrix, policy: &SpecAugmentPolicy) -> Result<FeatureMatrix, PerturbError> {
    spec_augment_with_masks(features, policy).map(|(out, _)| out)
}
