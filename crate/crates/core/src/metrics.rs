//! Error rates (PER/CER/WER) from a unit-cost Levenshtein alignment, with the
//! substitution/insertion/deletion breakdown and confusion pairs.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("all references are empty")]
    AllReferencesEmpty,
}

/// Scoring unit, which decides how transcripts are split into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Word,
    /// User-perceived characters with whitespace dropped.
    Char,
    /// Whitespace-separated phone labels.
    Phone,
}

pub fn tokenize(text: &str, unit: Unit) -> Vec<String> {
    match unit {
        Unit::Word | Unit::Phone => text.split_whitespace().map(ToString::to_string).collect(),
        Unit::Char => text
            .graphemes(true)
            .filter(|g| !g.chars().all(char::is_whitespace))
            .map(ToString::to_string)
            .collect(),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorReport {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub hits: usize,
    pub ref_len: usize,
    /// `(S + I + D) / ref_len`; zero when `ref_len` is zero.
    pub rate: f64,
    /// `(reference, hypothesis)` token of every substitution, in alignment order.
    pub confusions: Vec<(String, String)>,
}

impl ErrorReport {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    fn update_rate(&mut self) {
        self.rate = if self.ref_len == 0 {
            0.0
        } else {
            self.errors() as f64 / self.ref_len as f64
        };
    }

    /// Pools counts and confusions of several reports.
    pub fn pooled<'a>(reports: impl IntoIterator<Item = &'a ErrorReport>) -> ErrorReport {
        let mut out = ErrorReport::default();
        for r in reports {
            out.substitutions += r.substitutions;
            out.insertions += r.insertions;
            out.deletions += r.deletions;
            out.hits += r.hits;
            out.ref_len += r.ref_len;
            out.confusions.extend(r.confusions.iter().cloned());
        }
        out.update_rate();
        out
    }
}

/// Alignment without the non-empty reference check.
///
/// Cells hold `(edits, gaps)` compared lexicographically, so among all
/// minimum-edit alignments the one with the fewest insertions plus deletions
/// (most substitutions) wins. That choice does not depend on which side is
/// the reference. Remaining ties go substitution, deletion, insertion.
fn align_counts<S: AsRef<str>>(reference: &[S], hypothesis: &[S]) -> ErrorReport {
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut cost = vec![(0usize, 0usize); (n + 1) * width];
    for i in 0..=n {
        cost[i * width] = (i, i);
    }
    for (j, c) in cost[..width].iter_mut().enumerate() {
        *c = (j, j);
    }
    let same = |i: usize, j: usize| reference[i - 1].as_ref() == hypothesis[j - 1].as_ref();
    let step = |(e, g): (usize, usize), de: usize, dg: usize| (e + de, g + dg);
    for i in 1..=n {
        for j in 1..=m {
            let diag = step(cost[(i - 1) * width + j - 1], usize::from(!same(i, j)), 0);
            let del = step(cost[(i - 1) * width + j], 1, 1);
            let ins = step(cost[i * width + j - 1], 1, 1);
            cost[i * width + j] = diag.min(del).min(ins);
        }
    }

    let mut report = ErrorReport {
        ref_len: n,
        ..ErrorReport::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * width + j];
        if i > 0 && j > 0 && step(cost[(i - 1) * width + j - 1], usize::from(!same(i, j)), 0) == here {
            if same(i, j) {
                report.hits += 1;
            } else {
                report.substitutions += 1;
                report.confusions.push((
                    reference[i - 1].as_ref().to_string(),
                    hypothesis[j - 1].as_ref().to_string(),
                ));
            }
            i -= 1;
            j -= 1;
        } else if i > 0 && step(cost[(i - 1) * width + j], 1, 1) == here {
            report.deletions += 1;
            i -= 1;
        } else {
            report.insertions += 1;
            j -= 1;
        }
    }
    report.confusions.reverse();
    report.update_rate();
    report
}

/// Minimum-edit-distance alignment of `hypothesis` against `reference`.
pub fn align<S: AsRef<str>>(reference: &[S], hypothesis: &[S]) -> Result<ErrorReport, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    Ok(align_counts(reference, hypothesis))
}

/// Aligns every pair and pools the counts.
///
/// Pairs with an empty reference still contribute their insertions.
pub fn corpus_report<R, S>(pairs: &[(R, R)]) -> Result<ErrorReport, MetricsError>
where
    R: AsRef<[S]>,
    S: AsRef<str>,
{
    let reports: Vec<ErrorReport> = pairs
        .iter()
        .map(|(r, h)| align_counts(r.as_ref(), h.as_ref()))
        .collect();
    let pooled = ErrorReport::pooled(&reports);
    if pooled.ref_len == 0 {
        return Err(MetricsError::AllReferencesEmpty);
    }
    Ok(pooled)
}

/// Pooled error rate: total errors over total reference length.
pub fn corpus_rate<R, S>(pairs: &[(R, R)]) -> Result<f64, MetricsError>
where
    R: AsRef<[S]>,
    S: AsRef<str>,
{
    corpus_report(pairs).map(|r| r.rate)
}

/// The `n` most frequent substitution pairs, by count then pair order.
pub fn top_confusions<'a>(
    reports: impl IntoIterator<Item = &'a ErrorReport>,
    n: usize,
) -> Vec<((String, String), usize)> {
    let mut counts: BTreeMap<&(String, String), usize> = BTreeMap::new();
    for r in reports {
        for pair in &r.confusions {
            *counts.entry(pair).or_default() += 1;
        }
    }
    let mut ranked: Vec<_> = counts.into_iter().map(|(p, c)| (p.clone(), c)).collect();
    // BTreeMap order is already lexicographic; a stable sort keeps it for ties.
    ranked.sort_by_key(|entry| core::cmp::Reverse(entry.1));
    ranked.truncate(n);
    ranked
}
