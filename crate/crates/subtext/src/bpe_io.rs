//! BPE merge-list files: header `#bpe v1 merges=<n>`, then one
//! `left<SPACE>right` pair per line in training order. Save and load
//! round-trip byte-identically.

use std::fs;
use std::path::Path;

use subtext_core::tokenize::{BpeModel, TokenizeError};

#[derive(Debug, thiserror::Error)]
pub enum BpeIoError {
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
    #[error("missing or malformed header (expected `#bpe v1 merges=<n>`)")]
    BadHeader,
    #[error("header declares {declared} merges but the file lists {actual}")]
    CountMismatch { declared: usize, actual: usize },
    #[error("line {line}: expected `left<SPACE>right`")]
    MalformedMerge { line: usize },
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
}

pub fn save_merges(path: &Path, model: &BpeModel) -> Result<(), BpeIoError> {
    let mut out = format!("#bpe v1 merges={}\n", model.num_merges());
    for (left, right) in model.merges() {
        out.push_str(left);
        out.push(' ');
        out.push_str(right);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| BpeIoError::Write {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_merges(path: &Path) -> Result<BpeModel, BpeIoError> {
    let raw = fs::read_to_string(path).map_err(|e| BpeIoError::Read {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = raw.lines();
    let header = lines.next().ok_or(BpeIoError::BadHeader)?;
    let header = header.strip_suffix('\r').unwrap_or(header);
    let declared: usize = header
        .strip_prefix("#bpe v1 merges=")
        .and_then(|n| n.parse().ok())
        .ok_or(BpeIoError::BadHeader)?;
    let mut merges = Vec::with_capacity(declared);
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.strip_suffix('\r').unwrap_or(line);
        let pair = line
            .split_once(' ')
            .filter(|(l, r)| !l.is_empty() && !r.is_empty());
        let Some((left, right)) = pair else {
            return Err(BpeIoError::MalformedMerge { line: line_no });
        };
        merges.push((left.to_string(), right.to_string()));
    }
    if merges.len() != declared {
        return Err(BpeIoError::CountMismatch {
            declared,
            actual: merges.len(),
        });
    }
    Ok(BpeModel::from_merges(merges)?)
}
