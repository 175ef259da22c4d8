//! Experiment orchestration: the resolved run configuration and the six
//! pipeline commands (train-bpe, encode, train, predict, evaluate, cv).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use subtext_core::corpus::{normalize_text, stratified_kfold};
use subtext_core::eval::{evaluate, CvSummary, EvalReport};
use subtext_core::features::{FeatureConfig, FeatureSpace, FeatureVector};
use subtext_core::model::{ClassifierModel, TrainConfig};
use subtext_core::tokenize::{is_sentinel, word_tokenize, BpeModel, Strategy, TokenStream};

use crate::bpe_io;
use crate::dataset_io;
use crate::embedding_io;
use crate::model_io::{self, EncoderArtifact, TrainedPipeline};
use crate::report;
use crate::wordpiece_io;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    Word,
    Bpe,
    Wordpiece,
}

/// One fully resolved run: defaults, config file, and flags already merged.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub strategy: StrategyChoice,
    pub merges: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub num_merges: usize,
    pub word_ngrams: usize,
    pub minn: usize,
    pub maxn: usize,
    pub lr: f64,
    pub epochs: usize,
    pub dim: usize,
    pub buckets: u32,
    pub min_count: u64,
    pub seed: u64,
    pub k: usize,
    pub pretrained: Option<PathBuf>,
    pub tweet_mode: bool,
    pub has_header: bool,
    pub out: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub splits_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            strategy: StrategyChoice::Word,
            merges: None,
            vocab: None,
            num_merges: 30_000,
            word_ngrams: 1,
            minn: 0,
            maxn: 0,
            lr: 0.5,
            epochs: 5,
            dim: 100,
            buckets: 2_000_000,
            min_count: 1,
            seed: 42,
            k: 5,
            pretrained: None,
            tweet_mode: false,
            has_header: false,
            out: None,
            report_json: None,
            model: None,
            splits_out: None,
        }
    }
}

impl RunConfig {
    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            min_count: self.min_count,
            bucket_count: self.buckets,
            word_ngram_order: self.word_ngrams,
            subword_min: self.minn,
            subword_max: self.maxn,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.lr,
            epochs: self.epochs,
            dim: self.dim,
            seed: self.seed,
        }
    }

    fn data(&self) -> Result<&Path> {
        self.data.as_deref().context("--data is required")
    }

    fn out(&self) -> Result<&Path> {
        self.out.as_deref().context("--out is required")
    }

    fn model_path(&self) -> Result<&Path> {
        self.model.as_deref().context("--model is required")
    }
}

/// Per-word memoized document encoding. Produces exactly what
/// [`subtext_core::tokenize::encode_document`] produces, but reuses each
/// word's pieces across a whole corpus pass.
pub struct CachedEncoder<'a> {
    strategy: Strategy<'a>,
    cache: HashMap<String, TokenStream>,
}

impl<'a> CachedEncoder<'a> {
    pub fn new(strategy: Strategy<'a>) -> Self {
        CachedEncoder {
            strategy,
            cache: HashMap::new(),
        }
    }

    pub fn encode(&mut self, text: &str) -> TokenStream {
        let mut out = Vec::new();
        for token in word_tokenize(text) {
            if matches!(self.strategy, Strategy::Word) || is_sentinel(&token) {
                out.push(token);
                continue;
            }
            if let Some(pieces) = self.cache.get(&token) {
                out.extend(pieces.iter().cloned());
                continue;
            }
            let pieces = match &self.strategy {
                Strategy::Word => unreachable!("word strategy handled above"),
                Strategy::Bpe(model) => model.encode(&token),
                Strategy::Wordpiece(vocab) => vocab.encode(&token),
            };
            out.extend(pieces.iter().cloned());
            self.cache.insert(token, pieces);
        }
        out
    }
}

/// Word frequencies of normalized, tokenized text; sentinels are excluded
/// (they pass through encoders unsplit, so they carry no merge statistics).
fn word_frequencies<'a>(texts: impl IntoIterator<Item = &'a str>) -> HashMap<String, u64> {
    let mut freqs: HashMap<String, u64> = HashMap::new();
    for text in texts {
        for token in word_tokenize(text) {
            if is_sentinel(&token) {
                continue;
            }
            *freqs.entry(token).or_insert(0) += 1;
        }
    }
    freqs
}

fn train_bpe_on_texts<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    num_merges: usize,
) -> Result<BpeModel> {
    let freqs = word_frequencies(texts);
    BpeModel::train(freqs.iter().map(|(w, f)| (w.as_str(), *f)), num_merges)
        .context("training BPE")
}

/// Resolves the encoder for commands that never train one (`encode`,
/// `predict` uses the model artifact instead): bpe and wordpiece require
/// their artifact files.
fn load_encoder_artifact(config: &RunConfig) -> Result<EncoderArtifact> {
    match config.strategy {
        StrategyChoice::Word => Ok(EncoderArtifact::Word),
        StrategyChoice::Bpe => {
            let path = config
                .merges
                .as_deref()
                .context("bpe strategy requires --merges (train one with `train-bpe`)")?;
            Ok(EncoderArtifact::Bpe(
                bpe_io::load_merges(path).context("loading merges file")?,
            ))
        }
        StrategyChoice::Wordpiece => Ok(EncoderArtifact::Wordpiece(load_wordpiece(config)?)),
    }
}

fn load_wordpiece(config: &RunConfig) -> Result<subtext_core::tokenize::WordpieceVocab> {
    let path = config
        .vocab
        .as_deref()
        .context("wordpiece strategy requires --vocab")?;
    wordpiece_io::load_wordpiece_vocab(path).context("loading wordpiece vocabulary")
}

/// Resolves the encoder for training commands: a bpe strategy without an
/// explicit merges file trains one on the supplied training texts.
fn resolve_training_encoder<'a>(
    config: &RunConfig,
    train_texts: impl IntoIterator<Item = &'a str>,
) -> Result<EncoderArtifact> {
    match config.strategy {
        StrategyChoice::Word => Ok(EncoderArtifact::Word),
        StrategyChoice::Wordpiece => Ok(EncoderArtifact::Wordpiece(load_wordpiece(config)?)),
        StrategyChoice::Bpe => match config.merges.as_deref() {
            Some(path) => Ok(EncoderArtifact::Bpe(
                bpe_io::load_merges(path).context("loading merges file")?,
            )),
            None => Ok(EncoderArtifact::Bpe(train_bpe_on_texts(
                train_texts,
                config.num_merges,
            )?)),
        },
    }
}

fn write_or_print(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, contents)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Encodes and featurizes normalized texts, then trains a classifier with
/// the global label inventory. The encoder must already be resolved from
/// training data only.
fn train_pipeline(
    texts: &[String],
    label_ids: &[usize],
    labels: &[String],
    encoder: EncoderArtifact,
    config: &RunConfig,
) -> Result<(TrainedPipeline, Vec<f64>)> {
    let streams: Vec<TokenStream> = {
        let mut cached = CachedEncoder::new(encoder.strategy());
        texts.iter().map(|t| cached.encode(t)).collect()
    };
    let space = FeatureSpace::build(&streams, config.feature_config())
        .context("building feature space")?;
    let examples: Vec<(FeatureVector, usize)> = streams
        .iter()
        .zip(label_ids)
        .map(|(stream, &y)| (space.featurize(stream), y))
        .collect();
    let mut model = ClassifierModel::init(
        space.total_features() as usize,
        config.dim,
        labels.to_vec(),
        config.seed,
    )
    .context("initializing model")?;
    if let Some(pretrained) = &config.pretrained {
        embedding_io::load_pretrained_embeddings(&mut model, &space, pretrained)
            .context("loading pretrained embeddings")?;
    }
    let losses = model
        .train(&examples, &config.train_config())
        .context("training model")?;
    let pipeline = TrainedPipeline {
        model,
        space,
        encoder,
        tweet_mode: config.tweet_mode,
        seed: config.seed,
    };
    Ok((pipeline, losses))
}

fn predict_ids(pipeline: &TrainedPipeline, texts: &[&str]) -> Vec<usize> {
    let mut encoder = CachedEncoder::new(pipeline.encoder.strategy());
    texts
        .iter()
        .map(|text| {
            let fv = pipeline.space.featurize(&encoder.encode(text));
            pipeline.model.predict(&fv).0
        })
        .collect()
}

pub fn cmd_train_bpe(config: &RunConfig) -> Result<()> {
    let out = config.out()?;
    let lines = dataset_io::load_text_lines(config.data()?, config.has_header)
        .context("reading corpus")?;
    let normalized: Vec<String> = lines
        .iter()
        .map(|l| normalize_text(l, config.tweet_mode))
        .collect();
    let model = train_bpe_on_texts(normalized.iter().map(|s| s.as_str()), config.num_merges)?;
    bpe_io::save_merges(out, &model).context("writing merges file")?;
    println!("learned {} merges -> {}", model.num_merges(), out.display());
    Ok(())
}

pub fn cmd_encode(config: &RunConfig) -> Result<()> {
    let artifact = load_encoder_artifact(config)?;
    let lines = dataset_io::load_text_lines(config.data()?, config.has_header)
        .context("reading input")?;
    let mut encoder = CachedEncoder::new(artifact.strategy());
    let mut out = String::new();
    for line in &lines {
        let text = normalize_text(line, config.tweet_mode);
        out.push_str(&encoder.encode(&text).join(" "));
        out.push('\n');
    }
    write_or_print(config.out.as_deref(), &out)
}

pub fn cmd_train(config: &RunConfig) -> Result<()> {
    let out = config.out()?;
    let dataset = dataset_io::load_dataset(config.data()?, config.has_header, config.tweet_mode)
        .context("loading dataset")?;
    let texts: Vec<String> = dataset.documents.iter().map(|d| d.text.clone()).collect();
    let encoder = resolve_training_encoder(config, texts.iter().map(|s| s.as_str()))?;
    let (pipeline, losses) =
        train_pipeline(&texts, &dataset.label_ids, &dataset.labels, encoder, config)?;
    model_io::save_model(out, &pipeline).context("saving model")?;
    println!(
        "trained on {} documents ({} classes, {} vocabulary words, {} encoder)",
        dataset.len(),
        dataset.num_classes(),
        pipeline.space.vocab_size(),
        pipeline.encoder.name(),
    );
    for (epoch, loss) in losses.iter().enumerate() {
        println!("epoch {epoch} mean loss {loss:.6}");
    }
    println!("saved model -> {}", out.display());
    Ok(())
}

pub fn cmd_predict(config: &RunConfig) -> Result<()> {
    let pipeline = model_io::load_model(config.model_path()?).context("loading model")?;
    let lines = dataset_io::load_text_lines(config.data()?, config.has_header)
        .context("reading input")?;
    let mut encoder = CachedEncoder::new(pipeline.encoder.strategy());
    let mut out = String::new();
    for line in &lines {
        let text = normalize_text(line, pipeline.tweet_mode);
        let fv = pipeline.space.featurize(&encoder.encode(&text));
        let (label, p) = pipeline.model.predict_label(&fv);
        out.push_str(&format!("{label}\t{p:.6}\n"));
    }
    write_or_print(config.out.as_deref(), &out)
}

pub fn cmd_evaluate(config: &RunConfig) -> Result<()> {
    let pipeline = model_io::load_model(config.model_path()?).context("loading model")?;
    // The artifact records how its training text was normalized; the gold
    // file must go through the same treatment.
    let dataset =
        dataset_io::load_dataset(config.data()?, config.has_header, pipeline.tweet_mode)
            .context("loading dataset")?;
    let labels = pipeline.model.labels();
    let gold: Vec<usize> = dataset
        .documents
        .iter()
        .map(|doc| {
            labels
                .iter()
                .position(|l| l == &doc.label)
                .with_context(|| format!("label `{}` is not in the model", doc.label))
        })
        .collect::<Result<_>>()?;
    let texts: Vec<&str> = dataset.documents.iter().map(|d| d.text.as_str()).collect();
    let pred = predict_ids(&pipeline, &texts);
    let eval_report = evaluate(&gold, &pred, labels.len()).context("scoring predictions")?;
    print!("{}", report::render_report(&eval_report, labels));
    if let Some(path) = &config.report_json {
        report::write_json(path, &report::json_report(&eval_report, labels))
            .context("writing JSON report")?;
    }
    Ok(())
}

pub fn cmd_cv(config: &RunConfig) -> Result<()> {
    let dataset = dataset_io::load_dataset(config.data()?, config.has_header, config.tweet_mode)
        .context("loading dataset")?;
    let spec =
        stratified_kfold(&dataset, config.k, config.seed).context("splitting dataset")?;
    if let Some(path) = &config.splits_out {
        dataset_io::save_splits(path, &spec).context("writing splits file")?;
    }

    // Wordpiece vocabularies and explicit merges files are external input
    // artifacts, shared across folds; a bpe strategy without --merges is
    // retrained inside every fold on that fold's training portion only.
    let shared: Option<EncoderArtifact> = match config.strategy {
        StrategyChoice::Bpe if config.merges.is_none() => None,
        _ => Some(load_encoder_artifact(config)?),
    };

    let mut reports: Vec<EvalReport> = Vec::with_capacity(spec.folds.len());
    for (fold_id, fold) in spec.folds.iter().enumerate() {
        let stage = |what: &str| format!("fold {fold_id}: {what}");
        let mut held_out = vec![false; dataset.len()];
        for &id in fold {
            held_out[id] = true;
        }
        let train_texts: Vec<String> = (0..dataset.len())
            .filter(|&id| !held_out[id])
            .map(|id| dataset.documents[id].text.clone())
            .collect();
        let train_labels: Vec<usize> = (0..dataset.len())
            .filter(|&id| !held_out[id])
            .map(|id| dataset.label_ids[id])
            .collect();
        let encoder = match &shared {
            Some(artifact) => artifact.clone(),
            None => EncoderArtifact::Bpe(
                train_bpe_on_texts(
                    train_texts.iter().map(|s| s.as_str()),
                    config.num_merges,
                )
                .with_context(|| stage("training BPE"))?,
            ),
        };
        let (pipeline, _losses) =
            train_pipeline(&train_texts, &train_labels, &dataset.labels, encoder, config)
                .with_context(|| stage("training"))?;
        let test_texts: Vec<&str> = fold
            .iter()
            .map(|&id| dataset.documents[id].text.as_str())
            .collect();
        let pred = predict_ids(&pipeline, &test_texts);
        let gold: Vec<usize> = fold.iter().map(|&id| dataset.label_ids[id]).collect();
        reports.push(
            evaluate(&gold, &pred, dataset.labels.len())
                .with_context(|| stage("scoring"))?,
        );
    }

    let summary = CvSummary::from_reports(&reports).context("aggregating folds")?;
    print!("{}", report::render_cv_report(&summary));
    if let Some(path) = &config.report_json {
        let json =
            report::json_cv_report(&reports, &summary, &dataset.labels, config.k, config.seed);
        report::write_json(path, &json).context("writing JSON report")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use subtext_core::tokenize::{encode_document, WordpieceVocab};

    #[test]
    fn cached_encoder_matches_encode_document() {
        let corpus = [("hug", 10u64), ("pug", 5), ("pun", 12), ("bun", 4), ("hugs", 5)];
        let bpe = BpeModel::train(corpus.iter().map(|&(w, f)| (w, f)), 4).unwrap();
        let vocab = WordpieceVocab::new(vec![
            "[UNK]".to_string(),
            "hug".to_string(),
            "##s".to_string(),
            "pun".to_string(),
        ])
        .unwrap();
        let texts = [
            "hug hugs pun pug !",
            "<user> hugs <url>",
            "",
            "bun bun hug",
        ];
        for strategy in [
            Strategy::Word,
            Strategy::Bpe(&bpe),
            Strategy::Wordpiece(&vocab),
        ] {
            let mut cached = CachedEncoder::new(match &strategy {
                Strategy::Word => Strategy::Word,
                Strategy::Bpe(m) => Strategy::Bpe(m),
                Strategy::Wordpiece(v) => Strategy::Wordpiece(v),
            });
            for text in &texts {
                assert_eq!(cached.encode(text), encode_document(text, &strategy));
            }
        }
    }

    #[test]
    fn bpe_word_frequencies_skip_sentinels() {
        let freqs = word_frequencies(["<user> go go <url>", "go !"]);
        assert_eq!(freqs.get("go"), Some(&3));
        assert_eq!(freqs.get("!"), Some(&1));
        assert!(!freqs.contains_key("<user>"));
        assert!(!freqs.contains_key("<url>"));
    }
}
