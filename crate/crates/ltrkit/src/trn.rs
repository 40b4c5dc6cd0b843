//! TRN transcripts: one utterance per line, tokens followed by `(utt_id)`.

use std::fs;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum TrnError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {0}: missing trailing (utt_id)")]
    MissingId(usize),
    #[error("line {line}: duplicate utterance {id:?}")]
    DuplicateId { line: usize, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrnEntry {
    pub utt_id: String,
    pub text: String,
}

pub fn parse_trn(text: &str) -> Result<Vec<TrnEntry>, TrnError> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let open = line
            .rfind('(')
            .filter(|_| line.ends_with(')'))
            .ok_or(TrnError::MissingId(idx + 1))?;
        let utt_id = line[open + 1..line.len() - 1].trim().to_string();
        if utt_id.is_empty() {
            return Err(TrnError::MissingId(idx + 1));
        }
        if !seen.insert(utt_id.clone()) {
            return Err(TrnError::DuplicateId {
                line: idx + 1,
                id: utt_id,
            });
        }
        out.push(TrnEntry {
            utt_id,
            text: line[..open].trim().to_string(),
        });
    }
    Ok(out)
}

pub fn read_trn(path: impl AsRef<Path>) -> Result<Vec<TrnEntry>, TrnError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TrnError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_trn(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines() {
        let entries = parse_trn("sh iy hh ae d (fcjf0-sa1)\n\n(empty-utt)\n").unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].utt_id, "fcjf0-sa1");
        assert_eq!(entries[0].text, "sh iy hh ae d");
        assert_eq!(entries[1].text, "");
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(parse_trn("no id here"), Err(TrnError::MissingId(1))));
        assert!(matches!(parse_trn("a ()"), Err(TrnError::MissingId(1))));
        assert!(matches!(
            parse_trn("a (x)\nb (x)"),
            Err(TrnError::DuplicateId { line: 2, .. })
        ));
    }
}
