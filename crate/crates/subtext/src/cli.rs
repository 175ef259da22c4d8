//! Command-line surface and configuration resolution. Every subcommand
//! takes the same flag set; values resolve as flags > JSON config file >
//! built-in defaults.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::run::{RunConfig, StrategyChoice};

#[derive(Parser, Debug)]
#[command(
    name = "subtext",
    version,
    about = "Word, BPE, wordpiece, and subword n-gram tokenization feeding a linear text classifier"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Learn a BPE merge list from a text corpus
    TrainBpe(CommonOpts),
    /// Tokenize a text file, one space-joined encoded line per input line
    Encode(CommonOpts),
    /// Train a classifier on a labeled TSV and save the model artifact
    Train(CommonOpts),
    /// Label raw text lines with a saved model
    Predict(CommonOpts),
    /// Score a saved model against a labeled TSV
    Evaluate(CommonOpts),
    /// Stratified k-fold cross-validation on a labeled TSV
    Cv(CommonOpts),
}

#[derive(Args, Debug, Default)]
pub struct CommonOpts {
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input file: `text<TAB>label` TSV where labels are needed, plain text otherwise
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Tokenization strategy: word, bpe, or wordpiece (bpe:<file> / wordpiece:<file> shorthand)
    #[arg(long)]
    pub strategy: Option<String>,
    /// BPE merges file (made by train-bpe); with `--strategy bpe`, skips retraining
    #[arg(long)]
    pub merges: Option<PathBuf>,
    /// Wordpiece vocabulary file, one token per line
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Merge operations to learn when training BPE [default: 30000]
    #[arg(long = "num-merges")]
    pub num_merges: Option<usize>,
    /// Word n-gram order: 1 = unigrams, 2 = also hashed bigrams [default: 1]
    #[arg(long = "word-ngrams")]
    pub word_ngrams: Option<usize>,
    /// Minimum subword n-gram length; 0 with --maxn 0 disables subwords [default: 0]
    #[arg(long)]
    pub minn: Option<usize>,
    /// Maximum subword n-gram length [default: 0]
    #[arg(long)]
    pub maxn: Option<usize>,
    /// Initial learning rate [default: 0.5]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Training epochs [default: 5]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Embedding dimension [default: 100]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Hashing-trick bucket count [default: 2000000]
    #[arg(long)]
    pub buckets: Option<u32>,
    /// Minimum token frequency for the word vocabulary [default: 1]
    #[arg(long = "min-count")]
    pub min_count: Option<u64>,
    /// PRNG seed for shuffling, initialization, and splits [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fold count for cross-validation [default: 5]
    #[arg(long)]
    pub k: Option<usize>,
    /// word2vec-text pretrained embeddings to initialize vocabulary rows
    #[arg(long)]
    pub pretrained: Option<PathBuf>,
    /// Replace http(s) URLs with <url> and @mentions with <user>
    #[arg(long = "tweet-mode")]
    pub tweet_mode: bool,
    /// Skip the first line of --data
    #[arg(long = "has-header")]
    pub has_header: bool,
    /// Output path (merges / encoded text / model / predictions, per command)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the evaluation or cross-validation report as JSON
    #[arg(long = "report-json")]
    pub report_json: Option<PathBuf>,
    /// Saved model artifact to load (predict, evaluate)
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Export the fold assignment of a cv run
    #[arg(long = "splits-out")]
    pub splits_out: Option<PathBuf>,
}

/// The JSON config file mirrors the flag names (kebab-case keys).
#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    data: Option<PathBuf>,
    strategy: Option<String>,
    merges: Option<PathBuf>,
    vocab: Option<PathBuf>,
    num_merges: Option<usize>,
    word_ngrams: Option<usize>,
    minn: Option<usize>,
    maxn: Option<usize>,
    lr: Option<f64>,
    epochs: Option<usize>,
    dim: Option<usize>,
    buckets: Option<u32>,
    min_count: Option<u64>,
    seed: Option<u64>,
    k: Option<usize>,
    pretrained: Option<PathBuf>,
    tweet_mode: Option<bool>,
    has_header: Option<bool>,
    out: Option<PathBuf>,
    report_json: Option<PathBuf>,
    model: Option<PathBuf>,
    splits_out: Option<PathBuf>,
}

fn parse_strategy(text: &str) -> Result<(StrategyChoice, Option<PathBuf>)> {
    let (kind, inline) = match text.split_once(':') {
        Some((kind, path)) => (kind, Some(PathBuf::from(path))),
        None => (text, None),
    };
    let choice = match kind {
        "word" => StrategyChoice::Word,
        "bpe" => StrategyChoice::Bpe,
        "wordpiece" => StrategyChoice::Wordpiece,
        other => bail!("unknown strategy `{other}` (expected word, bpe, or wordpiece)"),
    };
    if choice == StrategyChoice::Word && inline.is_some() {
        bail!("the word strategy takes no file argument");
    }
    Ok((choice, inline))
}

/// Merges defaults, the optional config file, and the flags into one
/// [`RunConfig`]. Boolean flags turn a setting on; they cannot turn off a
/// `true` coming from the config file.
pub fn resolve(opts: &CommonOpts) -> Result<RunConfig> {
    let file: FileConfig = match &opts.config {
        Some(path) => {
            let raw = fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            serde_json::from_str(&raw)
                .with_context(|| format!("parsing config file {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let defaults = RunConfig::default();

    let strategy_text = opts.strategy.clone().or(file.strategy);
    let (strategy, inline) = match &strategy_text {
        Some(text) => parse_strategy(text)?,
        None => (defaults.strategy, None),
    };

    let mut config = RunConfig {
        data: opts.data.clone().or(file.data),
        strategy,
        merges: opts.merges.clone().or(file.merges),
        vocab: opts.vocab.clone().or(file.vocab),
        num_merges: opts
            .num_merges
            .or(file.num_merges)
            .unwrap_or(defaults.num_merges),
        word_ngrams: opts
            .word_ngrams
            .or(file.word_ngrams)
            .unwrap_or(defaults.word_ngrams),
        minn: opts.minn.or(file.minn).unwrap_or(defaults.minn),
        maxn: opts.maxn.or(file.maxn).unwrap_or(defaults.maxn),
        lr: opts.lr.or(file.lr).unwrap_or(defaults.lr),
        epochs: opts.epochs.or(file.epochs).unwrap_or(defaults.epochs),
        dim: opts.dim.or(file.dim).unwrap_or(defaults.dim),
        buckets: opts.buckets.or(file.buckets).unwrap_or(defaults.buckets),
        min_count: opts
            .min_count
            .or(file.min_count)
            .unwrap_or(defaults.min_count),
        seed: opts.seed.or(file.seed).unwrap_or(defaults.seed),
        k: opts.k.or(file.k).unwrap_or(defaults.k),
        pretrained: opts.pretrained.clone().or(file.pretrained),
        tweet_mode: opts.tweet_mode || file.tweet_mode.unwrap_or(false),
        has_header: opts.has_header || file.has_header.unwrap_or(false),
        out: opts.out.clone().or(file.out),
        report_json: opts.report_json.clone().or(file.report_json),
        model: opts.model.clone().or(file.model),
        splits_out: opts.splits_out.clone().or(file.splits_out),
    };

    if let Some(path) = inline {
        let slot = match strategy {
            StrategyChoice::Bpe => &mut config.merges,
            StrategyChoice::Wordpiece => &mut config.vocab,
            StrategyChoice::Word => unreachable!("rejected by parse_strategy"),
        };
        // An explicit --merges/--vocab flag outranks the shorthand.
        slot.get_or_insert(path);
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn defaults_match_the_documented_values() {
        let config = resolve(&CommonOpts::default()).unwrap();
        assert_eq!(config.strategy, StrategyChoice::Word);
        assert_eq!(config.num_merges, 30_000);
        assert_eq!(config.word_ngrams, 1);
        assert_eq!((config.minn, config.maxn), (0, 0));
        assert_eq!(config.lr, 0.5);
        assert_eq!(config.epochs, 5);
        assert_eq!(config.dim, 100);
        assert_eq!(config.buckets, 2_000_000);
        assert_eq!(config.min_count, 1);
        assert_eq!(config.seed, 42);
        assert_eq!(config.k, 5);
        assert!(!config.tweet_mode);
    }

    #[test]
    fn flags_override_config_file_values() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            "{}",
            r#"{"lr": 0.1, "epochs": 9, "tweet-mode": true, "strategy": "bpe"}"#
        )
        .unwrap();
        let opts = CommonOpts {
            config: Some(f.path().to_path_buf()),
            lr: Some(0.9),
            ..CommonOpts::default()
        };
        let config = resolve(&opts).unwrap();
        assert_eq!(config.lr, 0.9);
        assert_eq!(config.epochs, 9);
        assert!(config.tweet_mode);
        assert_eq!(config.strategy, StrategyChoice::Bpe);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{}", r#"{"learning-rate": 0.1}"#).unwrap();
        let opts = CommonOpts {
            config: Some(f.path().to_path_buf()),
            ..CommonOpts::default()
        };
        assert!(resolve(&opts).is_err());
    }

    #[test]
    fn strategy_shorthand_fills_the_artifact_path() {
        let opts = CommonOpts {
            strategy: Some("bpe:merges.txt".to_string()),
            ..CommonOpts::default()
        };
        let config = resolve(&opts).unwrap();
        assert_eq!(config.strategy, StrategyChoice::Bpe);
        assert_eq!(config.merges, Some(PathBuf::from("merges.txt")));

        let opts = CommonOpts {
            strategy: Some("wordpiece:vocab.txt".to_string()),
            vocab: Some(PathBuf::from("explicit.txt")),
            ..CommonOpts::default()
        };
        let config = resolve(&opts).unwrap();
        assert_eq!(config.vocab, Some(PathBuf::from("explicit.txt")));
    }

    #[test]
    fn unknown_strategy_is_rejected() {
        let opts = CommonOpts {
            strategy: Some("char".to_string()),
            ..CommonOpts::default()
        };
        assert!(resolve(&opts).is_err());
    }

    #[test]
    fn cli_parses_every_documented_flag() {
        let cli = Cli::try_parse_from([
            "subtext",
            "cv",
            "--data", "corpus.tsv",
            "--strategy", "bpe",
            "--merges", "m.txt",
            "--vocab", "v.txt",
            "--word-ngrams", "2",
            "--minn", "2",
            "--maxn", "6",
            "--lr", "0.5",
            "--epochs", "5",
            "--dim", "100",
            "--buckets", "1000",
            "--min-count", "1",
            "--seed", "42",
            "--k", "5",
            "--pretrained", "vec.txt",
            "--tweet-mode",
            "--has-header",
            "--out", "out.txt",
            "--report-json", "report.json",
            "--model", "model.stxt",
            "--num-merges", "100",
            "--splits-out", "splits.txt",
        ])
        .unwrap();
        let Command::Cv(opts) = cli.command else {
            panic!("expected cv");
        };
        assert_eq!(opts.word_ngrams, Some(2));
        assert!(opts.tweet_mode);
        assert!(opts.has_header);
        assert_eq!(opts.num_merges, Some(100));
    }
}
