//! Pretrained-embedding initialization from word2vec text files
//! (`<vocab> <dim>` header, then `word v1 … v_d` lines).

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use subtext_core::features::FeatureSpace;
use subtext_core::model::{ClassifierModel, ModelError};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingIoError {
    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("line 1: malformed header (expected `<vocab> <dim>`)")]
    BadHeader,
    #[error("pretrained dimension {found} does not match model dimension {expected}")]
    DimensionMismatch { found: usize, expected: usize },
    #[error("line {line}: expected a word followed by {dim} values")]
    MalformedLine { line: usize, dim: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Overwrites the embedding rows of vocabulary words found in the file and
/// returns how many distinct rows were initialized. Hashed-bucket rows are
/// never touched; file words outside the vocabulary are ignored.
pub fn load_pretrained_embeddings(
    model: &mut ClassifierModel,
    space: &FeatureSpace,
    path: &Path,
) -> Result<usize, EmbeddingIoError> {
    let raw = fs::read_to_string(path).map_err(|e| EmbeddingIoError::Read {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = raw.lines();
    let header = lines.next().ok_or(EmbeddingIoError::BadHeader)?;
    let mut fields = header.split_whitespace();
    let _declared_vocab: usize = fields
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or(EmbeddingIoError::BadHeader)?;
    let dim: usize = fields
        .next()
        .and_then(|d| d.parse().ok())
        .ok_or(EmbeddingIoError::BadHeader)?;
    if fields.next().is_some() {
        return Err(EmbeddingIoError::BadHeader);
    }
    if dim != model.dim() {
        return Err(EmbeddingIoError::DimensionMismatch {
            found: dim,
            expected: model.dim(),
        });
    }

    let mut touched: HashSet<u32> = HashSet::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            return Err(EmbeddingIoError::MalformedLine { line: line_no, dim });
        };
        let mut values = Vec::with_capacity(dim);
        for field in fields {
            let value: f32 = field
                .parse()
                .map_err(|_| EmbeddingIoError::MalformedLine { line: line_no, dim })?;
            values.push(value);
        }
        if values.len() != dim {
            return Err(EmbeddingIoError::MalformedLine { line: line_no, dim });
        }
        if let Some(id) = space.word_id(word) {
            model.set_embedding_row(id as usize, &values)?;
            touched.insert(id);
        }
    }
    Ok(touched.len())
}
