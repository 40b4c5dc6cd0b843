//! The `ltrkit` multi-command binary.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
//! stderr; data goes to files or stdout.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ltrkit_core::features::{boundary_discontinuity, fbank, mvn, spectral_distance, FrontEnd};
use ltrkit_core::ltr::{reverse_segments, LtrConfig, DEFAULT_DURATIONS_MS};
use ltrkit_core::metrics::{self, top_confusions, ErrorReport, Unit};
use ltrkit_core::perturb::{spec_augment, speed_perturb, SpecAugmentPolicy, SpeedFactors};
use ltrkit_core::scoring::{
    ctc_loss, greedy_ctc_decode, rescore_hypotheses, FusionWeights, Hypothesis, Loss, TokenSequence, Vocabulary,
};
use serde::{Deserialize, Serialize};

use crate::container::{read_features, read_grid, write_features};
use crate::dataset::{build_set, build_speed_set, AugmentationSet};
use crate::manifest::{load_manifest, write_manifest};
use crate::trn::read_trn;
use crate::wav::{read_wav, read_wav_with_codec, write_wav, Codec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ltrkit",
    version,
    about = "Locally time-reversed speech augmentation toolkit"
)]
struct Cli {
    /// Print progress counters to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reverse samples within fixed-duration segments.
    Ltr {
        #[arg(long)]
        segment_ms: f64,
        #[command(flatten)]
        io: WavIo,
    },
    /// Change playback rate by linear-interpolation resampling.
    Speed {
        #[arg(long)]
        factor: f64,
        #[command(flatten)]
        io: WavIo,
    },
    /// Apply seeded time/frequency masking to an FBK1 feature file.
    Specaug {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        freq_masks: usize,
        #[arg(long, default_value_t = 27)]
        max_freq_width: usize,
        #[arg(long, default_value_t = 2)]
        time_masks: usize,
        #[arg(long, default_value_t = 0.05)]
        max_time_fraction: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Compute log-mel filterbank features into an FBK1 file.
    Featurize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, default_value_t = 80)]
        dims: usize,
        #[arg(long, default_value_t = 25.0)]
        window_ms: f64,
        #[arg(long, default_value_t = 10.0)]
        shift_ms: f64,
        /// Skip per-utterance mean/variance normalization.
        #[arg(long)]
        no_mvn: bool,
    },
    /// Build a 3-fold LTR training set (original + two segment durations).
    BuildSet {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        set: u8,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Build a speed-perturbed training set.
    BuildSpeedSet {
        #[arg(long, value_delimiter = ',', default_value = "0.9,1.0,1.1", value_parser = positive_f64)]
        factors: Vec<f64>,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Emit `segment_ms,value` CSV rows comparing LTR renderings.
    Analyze {
        #[arg(long, value_enum)]
        metric: Metric,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = positive_f64)]
        durations: Option<Vec<f64>>,
        /// Write CSV here instead of stdout.
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// CTC and shallow-fusion scoring.
    #[command(subcommand)]
    Score(ScoreCommand),
    /// Error rate between TRN reference and hypothesis files.
    Wer {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long, value_enum, default_value_t = UnitArg::Word)]
        unit: UnitArg,
        /// Number of top substitution pairs to list.
        #[arg(long, default_value_t = 10)]
        confusions: usize,
        /// Write the JSON report here; otherwise it follows the text on stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum ScoreCommand {
    /// CTC loss of a token sequence under a PST1 posterior grid.
    Ctc {
        #[arg(long)]
        grid: PathBuf,
        /// Whitespace-separated token indices, or labels when --vocab is set.
        #[arg(long, allow_hyphen_values = true)]
        tokens: String,
        /// Comma-separated labels for indices 0..K.
        #[arg(long)]
        vocab: Option<String>,
    },
    /// Best-path decoding of a PST1 grid.
    Greedy {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        vocab: Option<String>,
    },
    /// Pick the best hypothesis by fused CTC/attention/LM score.
    Fuse {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// JSON lines: {"tokens": "a b", "log_p_ctc": .., "log_p_att": .., "log_p_lm": ..}
        #[arg(long)]
        hyps: PathBuf,
    },
}

#[derive(Debug, Args)]
struct WavIo {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    /// Output codec; defaults to the input's.
    #[arg(long)]
    codec: Option<Codec>,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    out_manifest: PathBuf,
    #[arg(long, env = "LTRKIT_PARALLELISM", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    parallelism: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Metric {
    Boundary,
    SpectralDistance,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitArg {
    Word,
    Char,
    Phone,
}

impl UnitArg {
    fn unit(self) -> Unit {
        match self {
            UnitArg::Word => Unit::Word,
            UnitArg::Char => Unit::Char,
            UnitArg::Phone => Unit::Phone,
        }
    }

    fn rate_name(self) -> &'static str {
        match self {
            UnitArg::Word => "WER",
            UnitArg::Char => "CER",
            UnitArg::Phone => "PER",
        }
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not positive")),
        Err(e) => Err(e.to_string()),
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_DATA
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Ltr { segment_ms, io } => {
            let (audio, codec) = read_wav_with_codec(&io.input)?;
            let config = LtrConfig::new(segment_ms, audio.sample_rate_hz())?;
            let rendered = reverse_segments(&audio, &config)?;
            write_wav(&rendered, &io.output, io.codec.unwrap_or(codec))?;
        }
        Command::Speed { factor, io } => {
            let (audio, codec) = read_wav_with_codec(&io.input)?;
            let perturbed = speed_perturb(&audio, factor)?;
            write_wav(&perturbed, &io.output, io.codec.unwrap_or(codec))?;
        }
        Command::Specaug {
            seed,
            freq_masks,
            max_freq_width,
            time_masks,
            max_time_fraction,
            input,
            output,
        } => {
            let features = read_features(&input)?;
            let policy = SpecAugmentPolicy {
                num_freq_masks: freq_masks,
                max_freq_mask_width: max_freq_width,
                num_time_masks: time_masks,
                max_time_mask_fraction: max_time_fraction,
                seed,
            };
            write_features(&output, &spec_augment(&features, &policy)?)?;
        }
        Command::Featurize {
            input,
            output,
            dims,
            window_ms,
            shift_ms,
            no_mvn,
        } => {
            let audio = read_wav(&input)?;
            let front_end = FrontEnd {
                dims,
                frame_length_ms: window_ms,
                frame_shift_ms: shift_ms,
            };
            let raw = fbank(&audio, &front_end)?;
            let features = if no_mvn { raw } else { mvn(&raw) };
            write_features(&output, &features)?;
        }
        Command::BuildSet { set, build } => {
            let manifest = load_manifest(&build.manifest)?;
            let set = AugmentationSet::new(set)?;
            let records = build_set(&manifest, set, &build.out_dir, build.parallelism as usize)?;
            write_manifest(&build.out_manifest, &records)?;
            if verbose {
                writeln!(err, "set {}: {} -> {} records", set.id(), manifest.len(), records.len())?;
            }
        }
        Command::BuildSpeedSet { factors, build } => {
            let manifest = load_manifest(&build.manifest)?;
            let factors = SpeedFactors::new(factors)?;
            let records = build_speed_set(&manifest, &factors, &build.out_dir, build.parallelism as usize)?;
            write_manifest(&build.out_manifest, &records)?;
            if verbose {
                writeln!(
                    err,
                    "speed {:?}: {} -> {} records",
                    factors.as_slice(),
                    manifest.len(),
                    records.len()
                )?;
            }
        }
        Command::Analyze {
            metric,
            input,
            durations,
            output,
        } => {
            let audio = read_wav(&input)?;
            let durations = durations.unwrap_or_else(|| DEFAULT_DURATIONS_MS.to_vec());
            let csv = analyze(&audio, metric, &durations)?;
            match output {
                Some(path) => fs::write(&path, csv).with_context(|| path.display().to_string())?,
                None => out.write_all(csv.as_bytes())?,
            }
        }
        Command::Score(cmd) => score(cmd, out)?,
        Command::Wer {
            reference,
            hyp,
            unit,
            confusions,
            json,
        } => wer(&reference, &hyp, unit, confusions, json.as_deref(), out)?,
    }
    Ok(())
}

fn analyze(audio: &ltrkit_core::AudioBuffer, metric: Metric, durations: &[f64]) -> anyhow::Result<String> {
    let mut csv = String::from("segment_ms,value\n");
    let reference = match metric {
        Metric::SpectralDistance => Some(mvn(&fbank(audio, &FrontEnd::default())?)),
        Metric::Boundary => None,
    };
    for &ms in durations {
        let config = LtrConfig::new(ms, audio.sample_rate_hz())?;
        let rendered = reverse_segments(audio, &config)?;
        let value = match &reference {
            None => boundary_discontinuity(&rendered, &config)?,
            Some(natural) => spectral_distance(natural, &mvn(&fbank(&rendered, &FrontEnd::default())?))?,
        };
        csv.push_str(&format!("{ms},{value}\n"));
    }
    Ok(csv)
}

fn vocabulary(list: &str) -> anyhow::Result<Vocabulary> {
    Ok(Vocabulary::new(
        list.split(',').map(|s| s.trim().to_string()).collect(),
    )?)
}

#[derive(Serialize)]
struct CtcOutput {
    status: &'static str,
    loss: Option<f64>,
}

#[derive(Deserialize)]
struct HypLine {
    tokens: String,
    log_p_ctc: f64,
    log_p_att: f64,
    log_p_lm: f64,
}

#[derive(Serialize)]
struct FuseOutput<'a> {
    index: usize,
    tokens: &'a str,
    log_p_ctc: f64,
    log_p_att: f64,
    log_p_lm: f64,
    fused_score: f64,
}

fn score(cmd: ScoreCommand, out: &mut dyn Write) -> anyhow::Result<()> {
    match cmd {
        ScoreCommand::Ctc { grid, tokens, vocab } => {
            let grid = read_grid(&grid)?;
            let target = match vocab.as_deref() {
                Some(list) => vocabulary(list)?.encode(&tokens)?,
                None => TokenSequence(
                    tokens
                        .split_whitespace()
                        .map(|t| {
                            t.parse::<usize>()
                                .with_context(|| format!("token {t:?} is not an index"))
                        })
                        .collect::<anyhow::Result<_>>()?,
                ),
            };
            let result = match ctc_loss(&grid, &target)? {
                Loss::Finite(v) => CtcOutput {
                    status: "finite",
                    loss: Some(v),
                },
                Loss::Infeasible => CtcOutput {
                    status: "infeasible",
                    loss: None,
                },
                Loss::ZeroProbability => CtcOutput {
                    status: "zero-probability",
                    loss: None,
                },
            };
            writeln!(out, "{}", serde_json::to_string(&result)?)?;
        }
        ScoreCommand::Greedy { grid, vocab } => {
            let grid = read_grid(&grid)?;
            let decoded = greedy_ctc_decode(&grid);
            let text = match vocab.as_deref() {
                Some(list) => vocabulary(list)?.decode(&decoded).join(" "),
                None => decoded.0.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
            };
            writeln!(out, "{text}")?;
        }
        ScoreCommand::Fuse { alpha, beta, hyps } => {
            let weights = FusionWeights::new(0.0, alpha, beta)?;
            let text = fs::read_to_string(&hyps).with_context(|| hyps.display().to_string())?;
            let lines: Vec<HypLine> = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("line {}", i + 1)))
                .collect::<anyhow::Result<_>>()?;
            if lines.is_empty() {
                bail!("no hypotheses in {}", hyps.display());
            }
            // index labels in sorted order so index order matches label order
            let labels: BTreeSet<&str> = lines.iter().flat_map(|h| h.tokens.split_whitespace()).collect();
            let index: BTreeMap<&str, usize> = labels.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
            let candidates: Vec<Hypothesis> = lines
                .iter()
                .map(|h| {
                    let seq = h.tokens.split_whitespace().map(|t| index[t]).collect();
                    Hypothesis::new(TokenSequence(seq), h.log_p_ctc, h.log_p_att, h.log_p_lm)
                })
                .collect();
            let best = rescore_hypotheses(&candidates, &weights)?;
            let pos = candidates
                .iter()
                .position(|h| {
                    h.tokens == best.tokens
                        && h.log_p_ctc == best.log_p_ctc
                        && h.log_p_att == best.log_p_att
                        && h.log_p_lm == best.log_p_lm
                })
                .expect("best hypothesis comes from the candidates");
            let line = &lines[pos];
            let result = FuseOutput {
                index: pos,
                tokens: &line.tokens,
                log_p_ctc: line.log_p_ctc,
                log_p_att: line.log_p_att,
                log_p_lm: line.log_p_lm,
                fused_score: best.fused_score.unwrap_or(f64::NAN),
            };
            writeln!(out, "{}", serde_json::to_string(&result)?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Confusion {
    reference: String,
    hypothesis: String,
    count: usize,
}

#[derive(Serialize)]
struct WerJson {
    metric: &'static str,
    utterances: usize,
    ref_len: usize,
    hits: usize,
    substitutions: usize,
    insertions: usize,
    deletions: usize,
    rate: f64,
    top_confusions: Vec<Confusion>,
}

fn wer(
    reference: &Path,
    hyp: &Path,
    unit: UnitArg,
    n_confusions: usize,
    json_path: Option<&Path>,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let refs = read_trn(reference)?;
    let hyps: BTreeMap<String, String> = read_trn(hyp)?.into_iter().map(|e| (e.utt_id, e.text)).collect();
    let mut pairs = Vec::with_capacity(refs.len());
    for r in &refs {
        let Some(h) = hyps.get(&r.utt_id) else {
            bail!("utterance {:?} has no hypothesis", r.utt_id);
        };
        pairs.push((
            metrics::tokenize(&r.text, unit.unit()),
            metrics::tokenize(h, unit.unit()),
        ));
    }
    if let Some(extra) = hyps.keys().find(|k| !refs.iter().any(|r| &r.utt_id == *k)) {
        bail!("hypothesis {extra:?} has no reference");
    }
    let pooled: ErrorReport = metrics::corpus_report(&pairs)?;
    let top = top_confusions([&pooled], n_confusions.max(1));

    let name = unit.rate_name();
    writeln!(out, "utterances: {}", refs.len())?;
    writeln!(out, "reference tokens: {}", pooled.ref_len)?;
    writeln!(
        out,
        "hits {} / substitutions {} / deletions {} / insertions {}",
        pooled.hits, pooled.substitutions, pooled.deletions, pooled.insertions
    )?;
    writeln!(out, "{name}: {:.2}%", 100.0 * pooled.rate)?;
    if n_confusions > 0 && !top.is_empty() {
        writeln!(out, "top substitutions:")?;
        for ((r, h), c) in &top {
            writeln!(out, "  {r} -> {h}\t{c}")?;
        }
    }

    let report = WerJson {
        metric: name,
        utterances: refs.len(),
        ref_len: pooled.ref_len,
        hits: pooled.hits,
        substitutions: pooled.substitutions,
        insertions: pooled.insertions,
        deletions: pooled.deletions,
        rate: pooled.rate,
        top_confusions: top
            .into_iter()
            .take(n_confusions)
            .map(|((reference, hypothesis), count)| Confusion {
                reference,
                hypothesis,
                count,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&report)?;
    match json_path {
        Some(p) => fs::write(p, json + "\n").with_context(|| p.display().to_string())?,
        None => writeln!(out, "{json}")?,
    }
    Ok(())
}
