//! Joint CTC/attention scoring over externally supplied posteriors.
//!
//! Covers the CTC loss (forward algorithm plus an exhaustive path-sum
//! oracle), the autoregressive attention cross-entropy, the multi-task
//! training loss and the shallow-fusion decoding score used to pick the best
//! hypothesis from a finite set.
//!
//! Token indices run over `0..K`; the blank label is index `K`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Tolerance on row sums of probability distributions.
pub const SUM_TOLERANCE: f64 = 1e-6;
/// Largest number of paths the exhaustive oracle will enumerate.
pub const BRUTEFORCE_MAX_PATHS: u64 = 10_000_000;
/// Probability assigned to sequences missing from a [`TabularLm`].
pub const DEFAULT_LM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("vocabulary must contain at least one token")]
    EmptyVocabulary,
    #[error("duplicate token label {0:?}")]
    DuplicateToken(String),
    #[error("unknown token label {0:?}")]
    UnknownToken(String),
    #[error("token index {index} outside vocabulary of {size}")]
    TokenOutOfRange { index: usize, size: usize },
    #[error("grid values length {len} does not match {frames} x {classes}")]
    GridShape { len: usize, frames: usize, classes: usize },
    #[error("grid needs at least one frame and two classes")]
    GridTooSmall,
    #[error("row {row} is not a probability distribution (sum {sum})")]
    InvalidDistribution { row: usize, sum: f64 },
    #[error("{paths} paths exceed the brute-force limit")]
    TooLarge { paths: u64 },
    #[error("{steps} attention steps for a {target}-token target")]
    LengthMismatch { steps: usize, target: usize },
    #[error("weight {name} = {value} out of range")]
    InvalidWeight { name: &'static str, value: f64 },
    #[error("no hypotheses to rescore")]
    NoHypotheses,
    #[error("language model table mass {0} exceeds 1")]
    LmMassExceeded(f64),
}

/// A negative log-likelihood, or the reason it is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    Finite(f64),
    /// No path can produce the target with this many frames.
    Infeasible,
    /// Paths exist but all have probability zero.
    ZeroProbability,
}

impl Loss {
    fn from_log_prob(log_p: f64) -> Self {
        if log_p == f64::NEG_INFINITY {
            Loss::ZeroProbability
        } else {
            Loss::Finite(-log_p)
        }
    }

    /// Loss as a number; infinite statuses map to `+inf`.
    pub fn value(self) -> f64 {
        match self {
            Loss::Finite(v) => v,
            Loss::Infeasible | Loss::ZeroProbability => f64::INFINITY,
        }
    }

    /// Log-probability `-loss`.
    pub fn log_prob(self) -> f64 {
        -self.value()
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Loss::Finite(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
}

impl Vocabulary {
    pub fn new(tokens: Vec<String>) -> Result<Self, ScoringError> {
        if tokens.is_empty() {
            return Err(ScoringError::EmptyVocabulary);
        }
        for (i, t) in tokens.iter().enumerate() {
            if tokens[..i].contains(t) {
                return Err(ScoringError::DuplicateToken(t.clone()));
            }
        }
        Ok(Self { tokens })
    }

    /// Number of non-blank tokens, `K`.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn blank_index(&self) -> usize {
        self.tokens.len()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.tokens.iter().position(|t| t == label)
    }

    /// Maps whitespace-separated labels to a sequence.
    pub fn encode(&self, text: &str) -> Result<TokenSequence, ScoringError> {
        text.split_whitespace()
            .map(|l| self.index_of(l).ok_or_else(|| ScoringError::UnknownToken(l.into())))
            .collect::<Result<Vec<_>, _>>()
            .map(TokenSequence)
    }

    pub fn decode(&self, seq: &TokenSequence) -> Vec<&str> {
        seq.0.iter().filter_map(|&i| self.label(i)).collect()
    }
}

/// Label indices without blanks. Ordered lexicographically.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenSequence(pub Vec<usize>);

impl TokenSequence {
    pub fn new(tokens: Vec<usize>) -> Self {
        Self(tokens)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check_range(&self, size: usize) -> Result<(), ScoringError> {
        match self.0.iter().find(|&&i| i >= size) {
            Some(&index) => Err(ScoringError::TokenOutOfRange { index, size }),
            None => Ok(()),
        }
    }

    /// Adjacent equal pairs; each needs a separating blank frame.
    pub fn repeats(&self) -> usize {
        self.0.windows(2).filter(|w| w[0] == w[1]).count()
    }

    /// Fewest frames any CTC path for this sequence can have.
    pub fn min_frames(&self) -> usize {
        self.len() + self.repeats()
    }
}

impl From<Vec<usize>> for TokenSequence {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Per-frame distributions over `K` tokens plus blank, row-major `T x (K+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGrid {
    probs: Vec<f64>,
    frames: usize,
    classes: usize,
}

impl PosteriorGrid {
    /// Validates that every row is a distribution within [`SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>, frames: usize, classes: usize) -> Result<Self, ScoringError> {
        if frames == 0 || classes < 2 {
            return Err(ScoringError::GridTooSmall);
        }
        if frames.checked_mul(classes) != Some(probs.len()) {
            return Err(ScoringError::GridShape {
                len: probs.len(),
                frames,
                classes,
            });
        }
        for (row, chunk) in probs.chunks(classes).enumerate() {
            let sum: f64 = chunk.iter().sum();
            let in_range = chunk.iter().all(|p| (0.0..=1.0).contains(p));
            let normalized = (sum - 1.0).abs() <= SUM_TOLERANCE;
            if !in_range || !normalized {
                return Err(ScoringError::InvalidDistribution { row, sum });
            }
        }
        Ok(Self { probs, frames, classes })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ScoringError> {
        let classes = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != classes) {
            return Err(ScoringError::GridShape {
                len: rows.iter().map(Vec::len).sum(),
                frames: rows.len(),
                classes,
            });
        }
        Self::new(rows.concat(), rows.len(), classes)
    }

    /// Number of frames `T`.
    pub fn frames(&self) -> usize {
        self.frames
    }

    /// `K + 1`.
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn vocab_size(&self) -> usize {
        self.classes - 1
    }

    pub fn blank_index(&self) -> usize {
        self.classes - 1
    }

    pub fn prob(&self, frame: usize, class: usize) -> f64 {
        self.probs[frame * self.classes + class]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.probs[frame * self.classes..(frame + 1) * self.classes]
    }

    pub fn values(&self) -> &[f64] {
        &self.probs
    }
}

/// The target with blanks inserted before, between and after its tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtcTarget {
    prolonged: Vec<usize>,
}

impl CtcTarget {
    pub fn new(target: &TokenSequence, blank: usize) -> Self {
        let mut prolonged = Vec::with_capacity(2 * target.len() + 1);
        prolonged.push(blank);
        for &tok in target.as_slice() {
            prolonged.push(tok);
            prolonged.push(blank);
        }
        Self { prolonged }
    }

    pub fn states(&self) -> &[usize] {
        &self.prolonged
    }
}

/// A frame-level labelling, one label (token or blank) per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtcPath {
    pub labels: Vec<usize>,
    pub blank: usize,
}

impl CtcPath {
    pub fn collapse(&self) -> TokenSequence {
        collapse(&self.labels, self.blank)
    }
}

/// Merges consecutive repeats, then drops blanks.
pub fn collapse(labels: &[usize], blank: usize) -> TokenSequence {
    let mut out = Vec::new();
    let mut prev = None;
    for &l in labels {
        if Some(l) != prev && l != blank {
            out.push(l);
        }
        prev = Some(l);
    }
    TokenSequence(out)
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + libm::log1p(libm::exp(lo - hi))
}

/// CTC negative log-likelihood via the forward algorithm in log space.
pub fn ctc_loss(grid: &PosteriorGrid, target: &TokenSequence) -> Result<Loss, ScoringError> {
    target.check_range(grid.vocab_size())?;
    if grid.frames() < target.min_frames() {
        return Ok(Loss::Infeasible);
    }
    let blank = grid.blank_index();
    let states = CtcTarget::new(target, blank);
    let states = states.states();
    let n = states.len();
    let log_p = |t: usize, s: usize| libm::log(grid.prob(t, states[s]));

    let mut alpha = vec![f64::NEG_INFINITY; n];
    alpha[0] = log_p(0, 0);
    if n > 1 {
        alpha[1] = log_p(0, 1);
    }
    let mut next = vec![f64::NEG_INFINITY; n];
    for t in 1..grid.frames() {
        for s in 0..n {
            let mut acc = alpha[s];
            if s >= 1 {
                acc = log_add(acc, alpha[s - 1]);
            }
            if s >= 2 && states[s] != blank && states[s] != states[s - 2] {
                acc = log_add(acc, alpha[s - 2]);
            }
            next[s] = if acc == f64::NEG_INFINITY {
                acc
            } else {
                acc + log_p(t, s)
            };
        }
        core::mem::swap(&mut alpha, &mut next);
    }
    let total = if n > 1 {
        log_add(alpha[n - 1], alpha[n - 2])
    } else {
        alpha[0]
    };
    Ok(Loss::from_log_prob(total))
}

/// CTC loss by summing the probability of every path that collapses to the
/// target. Exponential in the frame count; for verification only.
pub fn ctc_loss_bruteforce(grid: &PosteriorGrid, target: &TokenSequence) -> Result<Loss, ScoringError> {
    target.check_range(grid.vocab_size())?;
    let classes = grid.classes() as u64;
    let paths = (0..grid.frames()).try_fold(1u64, |acc, _| acc.checked_mul(classes));
    match paths {
        Some(p) if p <= BRUTEFORCE_MAX_PATHS => {}
        other => {
            return Err(ScoringError::TooLarge {
                paths: other.unwrap_or(u64::MAX),
            })
        }
    }
    let blank = grid.blank_index();
    let mut labels = vec![0usize; grid.frames()];
    let mut total = 0.0;
    loop {
        if collapse(&labels, blank) == *target {
            total += labels
                .iter()
                .enumerate()
                .map(|(t, &l)| grid.prob(t, l))
                .product::<f64>();
        }
        // odometer increment, last frame fastest
        let mut pos = labels.len();
        loop {
            if pos == 0 {
                return Ok(if total > 0.0 {
                    Loss::Finite(-libm::log(total))
                } else if grid.frames() < target.min_frames() {
                    Loss::Infeasible
                } else {
                    Loss::ZeroProbability
                });
            }
            pos -= 1;
            labels[pos] += 1;
            if labels[pos] < grid.classes() {
                break;
            }
            labels[pos] = 0;
        }
    }
}

/// Attention-decoder cross-entropy `-sum_u log P(y_u | x, y_<u)`.
///
/// `steps[u]` is the decoder's distribution over tokens at step `u`.
pub fn attention_loss(steps: &[Vec<f64>], target: &TokenSequence) -> Result<Loss, ScoringError> {
    if steps.len() != target.len() {
        return Err(ScoringError::LengthMismatch {
            steps: steps.len(),
            target: target.len(),
        });
    }
    let mut log_p = 0.0;
    for (u, (dist, &tok)) in steps.iter().zip(target.as_slice()).enumerate() {
        let sum: f64 = dist.iter().sum();
        let normalized = (sum - 1.0).abs() <= SUM_TOLERANCE;
        if !normalized || dist.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(ScoringError::InvalidDistribution { row: u, sum });
        }
        let p = *dist.get(tok).ok_or(ScoringError::TokenOutOfRange {
            index: tok,
            size: dist.len(),
        })?;
        log_p += libm::log(p);
    }
    Ok(Loss::from_log_prob(log_p))
}

/// `w * x`, with a zero weight silencing the term even when `x` is infinite.
fn weighted(w: f64, x: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * x
    }
}

/// Multi-task loss `lambda * ctc + (1 - lambda) * att`.
pub fn mtl_loss(l_ctc: f64, l_att: f64, lambda: f64) -> f64 {
    weighted(lambda, l_ctc) + weighted(1.0 - lambda, l_att)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionWeights {
    pub lambda_mtl: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl FusionWeights {
    pub fn new(lambda_mtl: f64, alpha: f64, beta: f64) -> Result<Self, ScoringError> {
        let unit = |name, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(ScoringError::InvalidWeight { name, value })
            }
        };
        unit("lambda", lambda_mtl)?;
        unit("alpha", alpha)?;
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(ScoringError::InvalidWeight {
                name: "beta",
                value: beta,
            });
        }
        Ok(Self {
            lambda_mtl,
            alpha,
            beta,
        })
    }

    pub fn mtl_loss(&self, l_ctc: f64, l_att: f64) -> f64 {
        mtl_loss(l_ctc, l_att, self.lambda_mtl)
    }
}

/// A candidate transcription with its component log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub tokens: TokenSequence,
    pub log_p_ctc: f64,
    pub log_p_att: f64,
    pub log_p_lm: f64,
    /// Set by [`rescore_hypotheses`].
    pub fused_score: Option<f64>,
}

impl Hypothesis {
    pub fn new(tokens: TokenSequence, log_p_ctc: f64, log_p_att: f64, log_p_lm: f64) -> Self {
        Self {
            tokens,
            log_p_ctc,
            log_p_att,
            log_p_lm,
            fused_score: None,
        }
    }
}

/// `alpha * log P_ctc + (1 - alpha) * log P_att + beta * log P_lm`.
pub fn fused_score(h: &Hypothesis, w: &FusionWeights) -> f64 {
    weighted(w.alpha, h.log_p_ctc) + weighted(1.0 - w.alpha, h.log_p_att) + weighted(w.beta, h.log_p_lm)
}

/// Picks the hypothesis with the highest fused score.
///
/// Equal scores go to the lexicographically smaller token sequence, then to
/// the earlier hypothesis.
pub fn rescore_hypotheses(hyps: &[Hypothesis], w: &FusionWeights) -> Result<Hypothesis, ScoringError> {
    let scores: Vec<f64> = hyps.iter().map(|h| fused_score(h, w)).collect();
    let mut best: Option<usize> = None;
    for (i, h) in hyps.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => match scores[i].partial_cmp(&scores[b]) {
                Some(Ordering::Greater) => true,
                Some(Ordering::Equal) => h.tokens < hyps[b].tokens,
                _ => false,
            },
        };
        if better {
            best = Some(i);
        }
    }
    let b = best.ok_or(ScoringError::NoHypotheses)?;
    Ok(Hypothesis {
        fused_score: Some(scores[b]),
        ..hyps[b].clone()
    })
}

/// Best-path decoding: per-frame argmax (lowest index on ties), then collapse.
pub fn greedy_ctc_decode(grid: &PosteriorGrid) -> TokenSequence {
    let path: Vec<usize> = (0..grid.frames())
        .map(|t| {
            grid.row(t)
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |(bi, bp), (i, &p)| if p > bp { (i, p) } else { (bi, bp) },
                )
                .0
        })
        .collect();
    collapse(&path, grid.blank_index())
}

/// Language model given as an explicit table of sequence probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularLm {
    table: BTreeMap<TokenSequence, f64>,
    floor: f64,
}

impl TabularLm {
    pub fn new(table: BTreeMap<TokenSequence, f64>) -> Result<Self, ScoringError> {
        let mut mass = 0.0;
        for &p in table.values() {
            if !(0.0..=1.0).contains(&p) {
                return Err(ScoringError::LmMassExceeded(p));
            }
            mass += p;
        }
        if mass > 1.0 + SUM_TOLERANCE {
            return Err(ScoringError::LmMassExceeded(mass));
        }
        Ok(Self {
            table,
            floor: DEFAULT_LM_FLOOR,
        })
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// `log P_lm(y)`, using the floor for sequences outside the table.
    pub fn score(&self, y: &TokenSequence) -> f64 {
        libm::log(self.table.get(y).copied().unwrap_or(self.floor))
    }
}
