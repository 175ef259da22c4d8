//! Labeled text corpora and deterministic stratified cross-validation splits.
//!
//! A [`LabeledDataset`] holds documents in ingestion order together with a
//! duplicate-free label inventory built in first-appearance order, so class
//! ids are stable for a given input file. Text normalization and fold
//! splitting are pure functions of their inputs: the same dataset, fold
//! count, and seed always produce the same splits.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use unicode_normalization::UnicodeNormalization;

use crate::rng::Rng;

/// One labeled text instance; `id` is its position in the source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: usize,
    pub text: String,
    pub label: String,
}

/// Documents plus the label inventory. Class ids are indices into `labels`,
/// assigned in first-appearance order over the documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub documents: Vec<Document>,
    pub labels: Vec<String>,
    /// Class id of each document, parallel to `documents`.
    pub label_ids: Vec<usize>,
}

/// A k-way partition of document ids `0..N-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<Vec<usize>>,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("no documents")]
    Empty,
    #[error("fold count k={k} must be at least 2")]
    FoldCountTooSmall { k: usize },
    #[error("fold count k={k} exceeds document count {n}")]
    FoldCountExceedsDocuments { k: usize, n: usize },
}

impl LabeledDataset {
    /// Builds a dataset from `(text, label)` pairs in ingestion order.
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self, CorpusError> {
        if pairs.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut labels: Vec<String> = Vec::new();
        let mut label_ids = Vec::with_capacity(pairs.len());
        let mut documents = Vec::with_capacity(pairs.len());
        for (id, (text, label)) in pairs.into_iter().enumerate() {
            let class = match labels.iter().position(|l| *l == label) {
                Some(c) => c,
                None => {
                    labels.push(label.clone());
                    labels.len() - 1
                }
            };
            label_ids.push(class);
            documents.push(Document { id, text, label });
        }
        Ok(LabeledDataset {
            documents,
            labels,
            label_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn label_id(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Number of documents per class, indexed by class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.labels.len()];
        for &c in &self.label_ids {
            counts[c] += 1;
        }
        counts
    }
}

/// Canonicalizes raw text: Unicode NFC, lowercase, optional tweet-specific
/// URL/mention replacement, then whitespace runs collapsed to single spaces
/// and the ends trimmed. Total and idempotent.
///
/// With `tweet_mode`, `http://` or `https://` plus any following non-space
/// characters become the sentinel `<url>`, and `@` plus at least one word
/// character (alphanumeric or `_`) becomes `<user>`.
pub fn normalize_text(text: &str, tweet_mode: bool) -> String {
    let composed: String = text.nfc().collect();
    let lowered = composed.to_lowercase();
    let replaced = if tweet_mode {
        apply_tweet_rules(&lowered)
    } else {
        lowered
    };
    let mut out = String::with_capacity(replaced.len());
    for part in replaced.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(part);
    }
    out
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn apply_tweet_rules(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while !rest.is_empty() {
        if let Some(tail) = rest
            .strip_prefix("http://")
            .or_else(|| rest.strip_prefix("https://"))
        {
            let end = tail
                .find(|c: char| c.is_whitespace())
                .unwrap_or(tail.len());
            out.push_str("<url>");
            rest = &tail[end..];
        } else if let Some(tail) = rest.strip_prefix('@') {
            let end = tail
                .find(|c: char| !is_word_char(c))
                .unwrap_or(tail.len());
            if end > 0 {
                out.push_str("<user>");
                rest = &tail[end..];
            } else {
                out.push('@');
                rest = tail;
            }
        } else {
            let c = rest.chars().next().expect("non-empty rest");
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

/// Splits a dataset into `k` folds, stratified by class.
///
/// Within each class, document ids are shuffled by a seeded generator
/// ([`Rng`], pinned splitmix64-seeded xoshiro256**) using Fisher–Yates, then
/// all classes are dealt round-robin to folds through one continuously
/// advancing cursor. The continuous cursor makes overall fold sizes differ by
/// at most one while each class still lands within one of `n_class / k` per
/// fold. Fold contents are sorted ascending for stable output.
pub fn stratified_kfold(
    dataset: &LabeledDataset,
    k: usize,
    seed: u64,
) -> Result<SplitSpec, CorpusError> {
    let n = dataset.len();
    if k < 2 {
        return Err(CorpusError::FoldCountTooSmall { k });
    }
    if k > n {
        return Err(CorpusError::FoldCountExceedsDocuments { k, n });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.num_classes()];
    for (i, &c) in dataset.label_ids.iter().enumerate() {
        by_class[c].push(i);
    }
    let mut rng = Rng::new(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for ids in &mut by_class {
        rng.shuffle(ids);
        for &id in ids.iter() {
            folds[cursor % k].push(id);
            cursor += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(SplitSpec { k, seed, folds })
}
