use std::fs;
use std::path::Path;

use ltrkit::dataset::{build_set, build_speed_set, AugmentationSet};
use ltrkit::manifest::{load_manifest, write_manifest, AugmentKind, ManifestRecord};
use ltrkit::wav::{read_wav, write_wav, Codec};
use ltrkit_core::perturb::SpeedFactors;
use ltrkit_core::AudioBuffer;

fn corpus(dir: &Path, n: usize) -> Vec<ManifestRecord> {
    (0..n)
        .map(|i| {
            let len = 1600 + 97 * i;
            let samples = (0..len).map(|t| ((t * (i + 3)) % 200) as f32 / 200.0 - 0.5).collect();
            let audio = AudioBuffer::new(samples, 16000).unwrap();
            let path = dir.join(format!("u{i}.wav"));
            let codec = if i % 2 == 0 { Codec::Pcm16 } else { Codec::Float32 };
            write_wav(&audio, &path, codec).unwrap();
            ManifestRecord {
                utt_id: format!("u{i}"),
                audio_path: path.display().to_string(),
                text: format!("transcript number {i}"),
                duration_s: audio.duration_s(),
                augment: None,
            }
        })
        .collect()
}

#[test]
fn ltr_set_layout() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus(dir.path(), 4);
    let out = build_set(&input, AugmentationSet::new(5).unwrap(), &dir.path().join("set5"), 2).unwrap();
    assert_eq!(out.len(), 12);
    for (i, group) in out.chunks(3).enumerate() {
        assert_eq!(group[0].utt_id, input[i].utt_id);
        assert_eq!(group[0].augment.unwrap().kind, AugmentKind::Original);
        assert!(group[1].utt_id.ends_with("-ltr45"));
        assert!(group[2].utt_id.ends_with("-ltr50"));
        for rec in group {
            assert_eq!(rec.text, input[i].text);
            assert_eq!(
                read_wav(&rec.audio_path).unwrap().len(),
                read_wav(&input[i].audio_path).unwrap().len()
            );
        }
    }
}

#[test]
fn ltr_files_keep_source_codec() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus(dir.path(), 2);
    let out = build_set(&input, AugmentationSet::new(1).unwrap(), &dir.path().join("o"), 1).unwrap();
    let size = |p: &str| fs::metadata(p).unwrap().len();
    assert_eq!(size(&out[1].audio_path), size(&input[0].audio_path));
    assert_eq!(size(&out[4].audio_path), size(&input[1].audio_path));
}

#[test]
fn speed_set_layout() {
    let dir = tempfile::tempdir().unwrap();
    let mut input = corpus(dir.path(), 3);
    input[0].duration_s = 10.0;
    let out = build_speed_set(&input, &SpeedFactors::default(), &dir.path().join("sp"), 3).unwrap();
    assert_eq!(out.len(), 9);
    assert!((out[0].duration_s - 10.0 / 0.9).abs() < 1e-3);
    assert_eq!(out[0].utt_id, "u0-sp0.9");
    assert_eq!(out[1].utt_id, "u0");
    assert_eq!(out[1].audio_path, input[0].audio_path);
    let src = read_wav(&input[2].audio_path).unwrap().len();
    let fast = read_wav(&out[8].audio_path).unwrap().len();
    assert_eq!(fast, (src as f64 / 1.1).round() as usize);

    let identity = build_speed_set(
        &input,
        &SpeedFactors::new(vec![1.0]).unwrap(),
        &dir.path().join("id"),
        1,
    )
    .unwrap();
    for (a, b) in identity.iter().zip(&input) {
        assert_eq!(
            ManifestRecord {
                augment: None,
                ..a.clone()
            },
            *b
        );
        assert_eq!(a.augment.unwrap().kind, AugmentKind::Speed);
    }
    assert!(!dir.path().join("id").exists());
}

#[test]
fn missing_audio_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut input = corpus(dir.path(), 2);
    input[1].audio_path = "does/not/exist.wav".into();
    assert!(build_set(&input, AugmentationSet::new(2).unwrap(), &dir.path().join("o"), 2).is_err());
}

#[test]
fn manifest_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus(dir.path(), 3);
    let out = build_set(&input, AugmentationSet::new(3).unwrap(), &dir.path().join("o"), 1).unwrap();
    let path = dir.path().join("m.jsonl");
    write_manifest(&path, &out).unwrap();
    assert_eq!(load_manifest(&path).unwrap(), out);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains(r#""augment":{"type":"ltr","param":25.0}"#));
}
