//! N-fold augmented training sets.
//!
//! An LTR set pairs every original utterance with two LTR renderings
//! (durations fixed per set); a speed set pairs it with speed-perturbed
//! copies. Transcripts are copied unchanged. Rendering runs on a worker pool
//! but records are always emitted in input order.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use ltrkit_core::ltr::{reverse_segments, LtrConfig, LtrError};
use ltrkit_core::perturb::{speed_perturb, PerturbError, SpeedFactors};
use rayon::prelude::*;

use crate::manifest::{AugmentKind, Lineage, ManifestRecord};
use crate::wav::{read_wav_with_codec, write_wav, WavError};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("augmentation set must be 1..5, got {0}")]
    InvalidSet(u8),
    #[error("derived utt_id {0:?} collides with an existing id")]
    IdCollision(String),
    #[error("{path}: {source}")]
    Audio { path: String, source: WavError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Ltr(#[from] LtrError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// One of the five LTR training-set recipes.
///
/// Set `k` adds renderings at `10k - 5` and `10k` ms:
/// Set 1 = {5, 10}, Set 2 = {15, 20}, ..., Set 5 = {45, 50}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentationSet(u8);

impl AugmentationSet {
    pub fn new(id: u8) -> Result<Self, DatasetError> {
        if (1..=5).contains(&id) {
            Ok(Self(id))
        } else {
            Err(DatasetError::InvalidSet(id))
        }
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn durations_ms(self) -> [f64; 2] {
        let top = 10.0 * f64::from(self.0);
        [top - 5.0, top]
    }

    pub fn all() -> impl Iterator<Item = AugmentationSet> {
        (1..=5).map(AugmentationSet)
    }
}

pub fn ltr_id(utt_id: &str, segment_ms: f64) -> String {
    format!("{utt_id}-ltr{segment_ms}")
}

pub fn speed_id(utt_id: &str, factor: f64) -> String {
    format!("{utt_id}-sp{factor}")
}

fn check_collisions(input: &[ManifestRecord], derived: impl Iterator<Item = String>) -> Result<(), DatasetError> {
    let mut ids: HashSet<String> = input.iter().map(|r| r.utt_id.clone()).collect();
    for id in derived {
        if !ids.insert(id.clone()) {
            return Err(DatasetError::IdCollision(id));
        }
    }
    Ok(())
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool, DatasetError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| DatasetError::Pool(e.to_string()))
}

fn audio_err(path: &str) -> impl FnOnce(WavError) -> DatasetError + '_ {
    move |source| DatasetError::Audio {
        path: path.to_string(),
        source,
    }
}

fn ensure_dir(dir: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(|source| DatasetError::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn output_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join(format!("{id}.wav"))
}

fn derived(rec: &ManifestRecord, id: String, path: &Path, duration_s: f64, lineage: Lineage) -> ManifestRecord {
    ManifestRecord {
        utt_id: id,
        audio_path: path.display().to_string(),
        text: rec.text.clone(),
        duration_s,
        augment: Some(lineage),
    }
}

/// Builds the 3-fold LTR set: each original followed by its two renderings.
///
/// Renderings are written to `out_dir/<utt_id>-ltr<ms>.wav` in the source's
/// codec.
pub fn build_set(
    manifest: &[ManifestRecord],
    set: AugmentationSet,
    out_dir: &Path,
    parallelism: usize,
) -> Result<Vec<ManifestRecord>, DatasetError> {
    let durations = set.durations_ms();
    check_collisions(
        manifest,
        manifest
            .iter()
            .flat_map(|r| durations.iter().map(|&d| ltr_id(&r.utt_id, d))),
    )?;
    ensure_dir(out_dir)?;

    let render = |rec: &ManifestRecord| -> Result<Vec<ManifestRecord>, DatasetError> {
        let (audio, codec) = read_wav_with_codec(&rec.audio_path).map_err(audio_err(&rec.audio_path))?;
        let mut out = vec![ManifestRecord {
            augment: Some(Lineage {
                kind: AugmentKind::Original,
                param: 0.0,
            }),
            ..rec.clone()
        }];
        for &ms in &durations {
            let config = LtrConfig::new(ms, audio.sample_rate_hz())?;
            let rendered = reverse_segments(&audio, &config)?;
            let id = ltr_id(&rec.utt_id, ms);
            let path = output_path(out_dir, &id);
            let path_str = path.display().to_string();
            write_wav(&rendered, &path, codec).map_err(audio_err(&path_str))?;
            out.push(derived(
                rec,
                id,
                &path,
                rec.duration_s,
                Lineage {
                    kind: AugmentKind::Ltr,
                    param: ms,
                },
            ));
        }
        Ok(out)
    };

    let groups: Vec<Vec<ManifestRecord>> =
        pool(parallelism)?.install(|| manifest.par_iter().map(render).collect::<Result<_, _>>())?;
    Ok(groups.into_iter().flatten().collect())
}

/// Builds a speed-perturbed set, one record per factor for each original.
///
/// Factor 1.0 keeps the original id and audio file; other factors are written
/// to `out_dir/<utt_id>-sp<factor>.wav` with duration `original / factor`.
pub fn build_speed_set(
    manifest: &[ManifestRecord],
    factors: &SpeedFactors,
    out_dir: &Path,
    parallelism: usize,
) -> Result<Vec<ManifestRecord>, DatasetError> {
    let factors = factors.as_slice();
    check_collisions(
        manifest,
        manifest
            .iter()
            .flat_map(|r| factors.iter().filter(|&&f| f != 1.0).map(|&f| speed_id(&r.utt_id, f))),
    )?;
    if factors.iter().any(|&f| f != 1.0) {
        ensure_dir(out_dir)?;
    }

    let render = |rec: &ManifestRecord| -> Result<Vec<ManifestRecord>, DatasetError> {
        let mut source = None;
        let mut out = Vec::with_capacity(factors.len());
        for &factor in factors {
            let lineage = Lineage {
                kind: AugmentKind::Speed,
                param: factor,
            };
            if factor == 1.0 {
                out.push(ManifestRecord {
                    augment: Some(lineage),
                    ..rec.clone()
                });
                continue;
            }
            if source.is_none() {
                source = Some(read_wav_with_codec(&rec.audio_path).map_err(audio_err(&rec.audio_path))?);
            }
            let (audio, codec) = source.as_ref().expect("loaded above");
            let perturbed = speed_perturb(audio, factor)?;
            let id = speed_id(&rec.utt_id, factor);
            let path = output_path(out_dir, &id);
            let path_str = path.display().to_string();
            write_wav(&perturbed, &path, *codec).map_err(audio_err(&path_str))?;
            out.push(derived(rec, id, &path, rec.duration_s / factor, lineage));
        }
        Ok(out)
    };

    let groups: Vec<Vec<ManifestRecord>> =
        pool(parallelism)?.install(|| manifest.par_iter().map(render).collect::<Result<_, _>>())?;
    Ok(groups.into_iter().flatten().collect())
}
