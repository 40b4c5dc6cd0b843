//! JSON-lines corpus manifests.
//!
//! ```text
//! {"utt_id": "a01", "audio_path": "wav/a01.wav", "text": "she had", "duration_s": 1.5}
//! {"utt_id": "a01-ltr15", "audio_path": "out/a01-ltr15.wav", "text": "she had", "duration_s": 1.5, "augment": {"type": "ltr", "param": 15.0}}
//! ```

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentKind {
    Original,
    Ltr,
    Speed,
}

/// How a record was derived: LTR segment ms or speed factor in `param`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    #[serde(rename = "type")]
    pub kind: AugmentKind,
    pub param: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub utt_id: String,
    pub audio_path: String,
    pub text: String,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augment: Option<Lineage>,
}

const REQUIRED: [&str; 4] = ["utt_id", "audio_path", "text", "duration_s"];

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: malformed JSON: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: missing required field {field:?}")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: duplicate utt_id {id:?}")]
    DuplicateId { line: usize, id: String },
}

/// Parses manifest text. Blank lines are ignored; line numbers are 1-based.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRecord>, ManifestError> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| ManifestError::Json {
            line,
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or(ManifestError::Schema {
            line,
            message: "record is not a JSON object".into(),
        })?;
        if let Some(field) = REQUIRED.into_iter().find(|f| !obj.contains_key(*f)) {
            return Err(ManifestError::MissingField { line, field });
        }
        let record: ManifestRecord = serde_json::from_value(value).map_err(|e| ManifestError::Schema {
            line,
            message: e.to_string(),
        })?;
        if record.utt_id.is_empty() {
            return Err(ManifestError::Schema {
                line,
                message: "utt_id is empty".into(),
            });
        }
        if !(record.duration_s > 0.0 && record.duration_s.is_finite()) {
            return Err(ManifestError::Schema {
                line,
                message: format!("duration_s must be positive, got {}", record.duration_s),
            });
        }
        if !seen.insert(record.utt_id.clone()) {
            return Err(ManifestError::DuplicateId {
                line,
                id: record.utt_id,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRecord>, ManifestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_manifest(&text)
}

pub fn to_jsonl(records: &[ManifestRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("manifest records always serialize") + "\n")
        .collect()
}

pub fn write_manifest(path: impl AsRef<Path>, records: &[ManifestRecord]) -> Result<(), ManifestError> {
    let path = path.as_ref();
    let io = |source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io)?;
    file.write_all(to_jsonl(records).as_bytes()).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: &str = r#"{"utt_id": "a", "audio_path": "a.wav", "text": "hello there", "duration_s": 1.5}"#;

    #[test]
    fn empty_input() {
        assert!(parse_manifest("").unwrap().is_empty());
        assert!(parse_manifest("\n  \n").unwrap().is_empty());
    }

    #[test]
    fn parses_lineage() {
        let line = r#"{"utt_id": "a-ltr5", "audio_path": "x.wav", "text": "t", "duration_s": 2.0, "augment": {"type": "ltr", "param": 5.0}}"#;
        let recs = parse_manifest(&format!("{A}\n{line}\n")).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].augment, None);
        assert_eq!(
            recs[1].augment,
            Some(Lineage {
                kind: AugmentKind::Ltr,
                param: 5.0
            })
        );
        assert_eq!(parse_manifest(&to_jsonl(&recs)).unwrap(), recs);
    }

    #[test]
    fn duplicate_ids() {
        match parse_manifest(&format!("{A}\n{A}\n")) {
            Err(ManifestError::DuplicateId { line: 2, id }) => assert_eq!(id, "a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_text_names_field_and_line() {
        let bad = r#"{"utt_id": "b", "audio_path": "b.wav", "duration_s": 1.0}"#;
        let err = parse_manifest(&format!("{A}\n{bad}\n")).unwrap_err();
        assert!(matches!(err, ManifestError::MissingField { line: 2, field: "text" }));
        assert!(err.to_string().contains("text") && err.to_string().contains("line 2"));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse_manifest("{nope"),
            Err(ManifestError::Json { line: 1, .. })
        ));
        assert!(matches!(
            parse_manifest("[1]"),
            Err(ManifestError::Schema { line: 1, .. })
        ));
        let zero = r#"{"utt_id": "b", "audio_path": "b.wav", "text": "", "duration_s": 0}"#;
        assert!(matches!(parse_manifest(zero), Err(ManifestError::Schema { .. })));
        let typed = r#"{"utt_id": "b", "audio_path": "b.wav", "text": 3, "duration_s": 1}"#;
        assert!(matches!(parse_manifest(typed), Err(ManifestError::Schema { .. })));
    }
}
