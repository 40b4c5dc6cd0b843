//! Signal-level building blocks for locally time-reversed (LTR) speech
//! augmentation and end-to-end ASR scoring.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, manifests and
//! the command-line tool live in the `ltrkit` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod buffer;
pub mod features;
mod fft;
pub mod ltr;
pub mod metrics;
pub mod perturb;
pub mod scoring;

pub use crate::buffer::{AudioBuffer, BufferError};
pub use crate::features::{FeatureError, FeatureMatrix, FrontEnd};
pub use crate::ltr::{LtrConfig, LtrError, DEFAULT_DURATIONS_MS};
pub use crate::metrics::{ErrorReport, MetricsError, Unit};
pub use crate::perturb::{PerturbError, SpecAugmentPolicy, SpeedFactors};
pub use crate::scoring::{
    CtcPath, CtcTarget, FusionWeights, Hypothesis, Loss, PosteriorGrid, ScoringError, TabularLm, TokenSequence,
    Vocabulary,
};
