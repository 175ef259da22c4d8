//! Word-decomposition strategies: whitespace/punctuation word tokenization,
//! word n-grams, fastText-style subword character n-grams, trainable BPE
//! segmentation, and vocabulary-driven wordpiece encoding.
//!
//! All operations are deterministic pure functions. Downstream featurization
//! treats every emitted piece as an independent token, so the encoders here
//! fully define what the classifier sees.

mod bpe;
mod wordpiece;

pub use bpe::{strip_bpe_markers, BpeModel, BPE_MARKER};
pub use wordpiece::{WordpieceVocab, CONTINUATION_MARKER, UNK_TOKEN};

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// Ordered token sequence; no token is empty.
pub type TokenStream = Vec<String>;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum TokenizeError {
    #[error("n-gram order must be at least 1")]
    ZeroNgramOrder,
    #[error("invalid subword range {min}..={max} (need 1 <= min <= max)")]
    InvalidSubwordRange { min: usize, max: usize },
    #[error("subword extraction requires a non-empty word")]
    EmptyWord,
    #[error("BPE training corpus is empty")]
    EmptyCorpus,
    #[error("duplicate BPE merge ({left}, {right})")]
    DuplicateMerge { left: String, right: String },
    #[error("wordpiece vocabulary is empty")]
    EmptyVocab,
    #[error("wordpiece vocabulary is missing the {0} token")]
    MissingUnk(&'static str),
    #[error("duplicate wordpiece vocabulary token `{0}`")]
    DuplicateToken(String),
    #[error("wordpiece vocabulary contains an empty token")]
    EmptyToken,
}

/// Normalization sentinels emitted by tweet-mode preprocessing. They pass
/// through every tokenizer untouched.
pub fn is_sentinel(token: &str) -> bool {
    token == "<url>" || token == "<user>"
}

fn is_punctuation(c: char) -> bool {
    matches!(
        c.general_category_group(),
        GeneralCategoryGroup::Punctuation | GeneralCategoryGroup::Symbol
    )
}

/// Splits normalized text into word tokens: whitespace-separated chunks with
/// punctuation and symbol characters (Unicode categories P*, S*) broken out
/// as standalone single-character tokens. The `<url>`/`<user>` sentinels are
/// kept intact wherever they appear.
pub fn word_tokenize(text: &str) -> TokenStream {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for chunk in text.split_whitespace() {
        let mut rest = chunk;
        while !rest.is_empty() {
            if let Some(sentinel) = ["<url>", "<user>"]
                .iter()
                .find(|s| rest.starts_with(**s))
            {
                if !word.is_empty() {
                    tokens.push(core::mem::take(&mut word));
                }
                tokens.push(sentinel.to_string());
                rest = &rest[sentinel.len()..];
                continue;
            }
            let c = rest.chars().next().expect("non-empty rest");
            if is_punctuation(c) {
                if !word.is_empty() {
                    tokens.push(core::mem::take(&mut word));
                }
                tokens.push(c.to_string());
            } else {
                word.push(c);
            }
            rest = &rest[c.len_utf8()..];
        }
        if !word.is_empty() {
            tokens.push(core::mem::take(&mut word));
        }
    }
    tokens
}

/// All contiguous `n`-grams of the stream, each joined with a single space.
/// Streams shorter than `n` yield an empty result.
pub fn word_ngrams(tokens: &[String], n: usize) -> Result<TokenStream, TokenizeError> {
    if n == 0 {
        return Err(TokenizeError::ZeroNgramOrder);
    }
    if tokens.len() < n {
        return Ok(Vec::new());
    }
    Ok(tokens.windows(n).map(|w| w.join(" ")).collect())
}

/// Character n-grams of the boundary-wrapped word `<word>`, by Unicode
/// scalar, for every length in `[nmin, nmax]`, enumerated shortest length
/// first and left to right within a length.
///
/// For a word of character length L the wrapped length is L+2, so the count
/// is Σ_{n=nmin..nmax} max(0, L+3−n).
pub fn extract_subword_ngrams(
    word: &str,
    nmin: usize,
    nmax: usize,
) -> Result<TokenStream, TokenizeError> {
    if nmin == 0 || nmin > nmax {
        return Err(TokenizeError::InvalidSubwordRange {
            min: nmin,
            max: nmax,
        });
    }
    if word.is_empty() {
        return Err(TokenizeError::EmptyWord);
    }
    let wrapped: Vec<char> = core::iter::once('<')
        .chain(word.chars())
        .chain(core::iter::once('>'))
        .collect();
    let mut out = Vec::new();
    for n in nmin..=nmax {
        if n > wrapped.len() {
            break;
        }
        for window in wrapped.windows(n) {
            out.push(window.iter().collect());
        }
    }
    Ok(out)
}

/// How [`encode_document`] decomposes each word token.
#[derive(Debug, Clone)]
pub enum Strategy<'a> {
    /// Word tokens pass through unchanged.
    Word,
    /// Each word is segmented by the trained BPE merge list.
    Bpe(&'a BpeModel),
    /// Each word is segmented by greedy longest-match against a vocabulary.
    Wordpiece(&'a WordpieceVocab),
}

/// Tokenizes normalized text into words, then applies the strategy's
/// segmenter to each word, emitting the pieces in order as independent
/// tokens. The `<url>`/`<user>` sentinels bypass segmentation so they reach
/// featurization intact.
pub fn encode_document(text: &str, strategy: &Strategy) -> TokenStream {
    let words = word_tokenize(text);
    match strategy {
        Strategy::Word => words,
        Strategy::Bpe(model) => {
            let mut out = Vec::with_capacity(words.len());
            for word in &words {
                if is_sentinel(word) {
                    out.push(word.clone());
                } else {
                    out.extend(model.encode(word));
                }
            }
            out
        }
        Strategy::Wordpiece(vocab) => {
            let mut out = Vec::with_capacity(words.len());
            for word in &words {
                if is_sentinel(word) {
                    out.push(word.clone());
                } else {
                    out.extend(vocab.encode(word));
                }
            }
            out
        }
    }
}
