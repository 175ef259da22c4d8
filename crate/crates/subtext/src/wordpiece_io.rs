//! Wordpiece vocabulary files: one token per line, line index = token id.

use std::fs;
use std::path::Path;

use subtext_core::tokenize::{TokenizeError, WordpieceVocab};

#[derive(Debug, thiserror::Error)]
pub enum WordpieceIoError {
    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
}

pub fn load_wordpiece_vocab(path: &Path) -> Result<WordpieceVocab, WordpieceIoError> {
    let raw = fs::read_to_string(path).map_err(|e| WordpieceIoError::Read {
        path: path.display().to_string(),
        source: e,
    })?;
    let tokens: Vec<String> = raw
        .lines()
        .map(|line| line.strip_suffix('\r').unwrap_or(line).to_string())
        .collect();
    Ok(WordpieceVocab::new(tokens)?)
}
