//! Self-contained binary model artifact.
//!
//! Layout: magic `STXT`, version byte, little-endian u32 length, UTF-8 JSON
//! metadata (dimensions, labels, seed, tweet mode, feature space, encoder
//! artifacts), then the embedding matrix and the output matrix row-major as
//! little-endian 32-bit floats. Everything needed to predict on raw text —
//! vocabulary, BPE merges or wordpiece tokens, normalization mode — rides
//! inside the file, so `load_model` yields a ready-to-run pipeline.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use subtext_core::corpus::normalize_text;
use subtext_core::features::{FeatureConfig, FeatureError, FeatureSpace, FeatureVector};
use subtext_core::model::{ClassifierModel, ModelError};
use subtext_core::tokenize::{
    encode_document, BpeModel, Strategy, TokenizeError, WordpieceVocab,
};

pub const MODEL_MAGIC: &[u8; 4] = b"STXT";
pub const MODEL_VERSION: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model version {found} (expected {MODEL_VERSION})")]
    BadVersion { found: u8 },
    #[error("model file is truncated")]
    Truncated,
    #[error("model file has trailing bytes")]
    TrailingBytes,
    #[error("model metadata is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model metadata is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
}

/// The word-decomposition artifact a trained model carries with it.
#[derive(Debug, Clone)]
pub enum EncoderArtifact {
    Word,
    Bpe(BpeModel),
    Wordpiece(WordpieceVocab),
}

impl EncoderArtifact {
    pub fn strategy(&self) -> Strategy<'_> {
        match self {
            EncoderArtifact::Word => Strategy::Word,
            EncoderArtifact::Bpe(model) => Strategy::Bpe(model),
            EncoderArtifact::Wordpiece(vocab) => Strategy::Wordpiece(vocab),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EncoderArtifact::Word => "word",
            EncoderArtifact::Bpe(_) => "bpe",
            EncoderArtifact::Wordpiece(_) => "wordpiece",
        }
    }
}

/// A trained classifier plus everything required to run it on raw text.
#[derive(Debug)]
pub struct TrainedPipeline {
    pub model: ClassifierModel,
    pub space: FeatureSpace,
    pub encoder: EncoderArtifact,
    pub tweet_mode: bool,
    pub seed: u64,
}

impl TrainedPipeline {
    /// Raw text → normalized text → encoded tokens → feature ids.
    pub fn featurize_raw(&self, raw: &str) -> FeatureVector {
        let text = normalize_text(raw, self.tweet_mode);
        let tokens = encode_document(&text, &self.encoder.strategy());
        self.space.featurize(&tokens)
    }

    pub fn predict_raw(&self, raw: &str) -> (&str, f64) {
        self.model.predict_label(&self.featurize_raw(raw))
    }
}

#[derive(Serialize, Deserialize)]
struct MetaFeatures {
    min_count: u64,
    bucket_count: u32,
    word_ngram_order: usize,
    subword_min: usize,
    subword_max: usize,
    vocab: Vec<(String, u64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MetaStrategy {
    Word,
    Bpe { merges: Vec<(String, String)> },
    Wordpiece { tokens: Vec<String>, max_word_chars: usize },
}

#[derive(Serialize, Deserialize)]
struct Meta {
    d: usize,
    c: usize,
    v: u32,
    b: u32,
    labels: Vec<String>,
    seed: u64,
    tweet_mode: bool,
    features: MetaFeatures,
    strategy: MetaStrategy,
}

pub fn save_model(path: &Path, pipeline: &TrainedPipeline) -> Result<(), ModelIoError> {
    let config = pipeline.space.config();
    let meta = Meta {
        d: pipeline.model.dim(),
        c: pipeline.model.num_classes(),
        v: pipeline.space.vocab_size(),
        b: config.bucket_count,
        labels: pipeline.model.labels().to_vec(),
        seed: pipeline.seed,
        tweet_mode: pipeline.tweet_mode,
        features: MetaFeatures {
            min_count: config.min_count,
            bucket_count: config.bucket_count,
            word_ngram_order: config.word_ngram_order,
            subword_min: config.subword_min,
            subword_max: config.subword_max,
            vocab: pipeline.space.entries().to_vec(),
        },
        strategy: match &pipeline.encoder {
            EncoderArtifact::Word => MetaStrategy::Word,
            EncoderArtifact::Bpe(model) => MetaStrategy::Bpe {
                merges: model.merges().to_vec(),
            },
            EncoderArtifact::Wordpiece(vocab) => MetaStrategy::Wordpiece {
                tokens: vocab.tokens().to_vec(),
                max_word_chars: vocab.max_word_chars(),
            },
        },
    };
    let json = serde_json::to_vec(&meta)?;
    let len = u32::try_from(json.len())
        .map_err(|_| ModelIoError::Inconsistent("metadata exceeds u32 length".to_string()))?;

    let e = pipeline.model.embeddings();
    let w = pipeline.model.output_weights();
    let mut bytes = Vec::with_capacity(9 + json.len() + 4 * (e.len() + w.len()));
    bytes.extend_from_slice(MODEL_MAGIC);
    bytes.push(MODEL_VERSION);
    bytes.extend_from_slice(&len.to_le_bytes());
    bytes.extend_from_slice(&json);
    for value in e.iter().chain(w.iter()) {
        bytes.extend_from_slice(&value.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| ModelIoError::Write {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_model(path: &Path) -> Result<TrainedPipeline, ModelIoError> {
    let bytes = fs::read(path).map_err(|e| ModelIoError::Read {
        path: path.display().to_string(),
        source: e,
    })?;
    if bytes.len() < 4 || &bytes[..4] != MODEL_MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    if bytes.len() < 9 {
        return Err(ModelIoError::Truncated);
    }
    if bytes[4] != MODEL_VERSION {
        return Err(ModelIoError::BadVersion { found: bytes[4] });
    }
    let json_len = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let json_end = 9usize
        .checked_add(json_len)
        .filter(|&end| end <= bytes.len())
        .ok_or(ModelIoError::Truncated)?;
    let meta: Meta = serde_json::from_slice(&bytes[9..json_end])?;

    if meta.labels.len() != meta.c {
        return Err(ModelIoError::Inconsistent(format!(
            "{} labels but c={}",
            meta.labels.len(),
            meta.c
        )));
    }
    if meta.features.bucket_count != meta.b {
        return Err(ModelIoError::Inconsistent(format!(
            "bucket count {} but b={}",
            meta.features.bucket_count, meta.b
        )));
    }
    let config = FeatureConfig {
        min_count: meta.features.min_count,
        bucket_count: meta.features.bucket_count,
        word_ngram_order: meta.features.word_ngram_order,
        subword_min: meta.features.subword_min,
        subword_max: meta.features.subword_max,
    };
    let space = FeatureSpace::from_entries(meta.features.vocab, config)?;
    if space.vocab_size() != meta.v {
        return Err(ModelIoError::Inconsistent(format!(
            "vocabulary lists {} words but v={}",
            space.vocab_size(),
            meta.v
        )));
    }

    let rows = space.total_features() as usize;
    let e_len = rows * meta.d;
    let w_len = meta.c * meta.d;
    let expected = json_end + 4 * (e_len + w_len);
    if bytes.len() < expected {
        return Err(ModelIoError::Truncated);
    }
    if bytes.len() > expected {
        return Err(ModelIoError::TrailingBytes);
    }
    let mut floats = bytes[json_end..]
        .chunks_exact(4)
        .map(|chunk| f32::from_le_bytes(chunk.try_into().unwrap()));
    let e: Vec<f32> = floats.by_ref().take(e_len).collect();
    let w: Vec<f32> = floats.collect();
    let model = ClassifierModel::from_parts(e, w, meta.labels, meta.d)?;

    let encoder = match meta.strategy {
        MetaStrategy::Word => EncoderArtifact::Word,
        MetaStrategy::Bpe { merges } => EncoderArtifact::Bpe(BpeModel::from_merges(merges)?),
        MetaStrategy::Wordpiece {
            tokens,
            max_word_chars,
        } => EncoderArtifact::Wordpiece(WordpieceVocab::with_max_word_chars(
            tokens,
            max_word_chars,
        )?),
    };

    Ok(TrainedPipeline {
        model,
        space,
        encoder,
        tweet_mode: meta.tweet_mode,
        seed: meta.seed,
    })
}
