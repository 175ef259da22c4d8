//! Wordpiece segmentation: greedy longest-match-first against a fixed
//! vocabulary, with `##` marking non-initial pieces.
//!
//! The vocabulary is an input artifact (one token per line in file form) and
//! is never trained here. Encoding a word:
//!
//! 1. If the word exceeds `max_word_chars` characters, emit `[UNK]`.
//! 2. Otherwise take the longest prefix of the remaining characters that is
//!    in the vocabulary — looked up with `##` prepended when not at the start
//!    of the word — emit it, and repeat on the remainder.
//! 3. If any step finds no match at all, the whole word becomes `[UNK]`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashSet;

use super::{TokenStream, TokenizeError};

/// Prefix carried by every non-initial piece.
pub const CONTINUATION_MARKER: &str = "##";
/// Whole-word fallback token; must be present in every vocabulary.
pub const UNK_TOKEN: &str = "[UNK]";

/// Longest matches are bounded by the word length, so the only quadratic
/// blowup risk is pathological single "words"; cap them.
const DEFAULT_MAX_WORD_CHARS: usize = 100;

/// A fixed wordpiece token inventory.
#[derive(Debug, Clone)]
pub struct WordpieceVocab {
    tokens: HashSet<String>,
    ordered: Vec<String>,
    max_word_chars: usize,
}

impl WordpieceVocab {
    /// Builds a vocabulary from tokens in id order, rejecting empty tokens,
    /// duplicates, and inventories without `[UNK]`.
    pub fn new(ordered: Vec<String>) -> Result<Self, TokenizeError> {
        Self::with_max_word_chars(ordered, DEFAULT_MAX_WORD_CHARS)
    }

    pub fn with_max_word_chars(
        ordered: Vec<String>,
        max_word_chars: usize,
    ) -> Result<Self, TokenizeError> {
        if ordered.is_empty() {
            return Err(TokenizeError::EmptyVocab);
        }
        let mut tokens = HashSet::with_capacity(ordered.len());
        for token in &ordered {
            if token.is_empty() {
                return Err(TokenizeError::EmptyToken);
            }
            if !tokens.insert(token.clone()) {
                return Err(TokenizeError::DuplicateToken(token.clone()));
            }
        }
        if !tokens.contains(UNK_TOKEN) {
            return Err(TokenizeError::MissingUnk(UNK_TOKEN));
        }
        Ok(WordpieceVocab {
            tokens,
            ordered,
            max_word_chars,
        })
    }

    /// Tokens in id (file line) order.
    pub fn tokens(&self) -> &[String] {
        &self.ordered
    }

    pub fn len(&self) -> usize {
        self.ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered.is_empty()
    }

    pub fn max_word_chars(&self) -> usize {
        self.max_word_chars
    }

    pub fn contains(&self, token: &str) -> bool {
        self.tokens.contains(token)
    }

    /// Greedy longest-match-first segmentation. The output is `[UNK]` exactly
    /// when the word is over-long or some position has no matching piece;
    /// otherwise stripping the `##` markers and concatenating reproduces the
    /// word.
    pub fn encode(&self, word: &str) -> TokenStream {
        let chars: Vec<char> = word.chars().collect();
        if chars.is_empty() || chars.len() > self.max_word_chars {
            return vec![UNK_TOKEN.to_string()];
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        while start < chars.len() {
            let mut end = chars.len();
            let mut matched: Option<String> = None;
            while end > start {
                let piece: String = chars[start..end].iter().collect();
                let candidate = if start > 0 {
                    format!("{CONTINUATION_MARKER}{piece}")
                } else {
                    piece
                };
                if self.tokens.contains(&candidate) {
                    matched = Some(candidate);
                    break;
                }
                end -= 1;
            }
            match matched {
                Some(piece) => {
                    pieces.push(piece);
                    start = end;
                }
                None => return vec![UNK_TOKEN.to_string()],
            }
        }
        pieces
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(tokens: &[&str]) -> WordpieceVocab {
        WordpieceVocab::new(tokens.iter().map(|t| t.to_string()).collect()).unwrap()
    }

    fn strs(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn encode_takes_longest_match_first() {
        let v = vocab(&["un", "##aff", "##able", "[UNK]"]);
        assert_eq!(v.encode("unaffable"), strs(&["un", "##aff", "##able"]));
    }

    #[test]
    fn whole_word_hit_is_a_single_piece() {
        let v = vocab(&["idiot", "##ic", "[UNK]"]);
        assert_eq!(v.encode("idiot"), strs(&["idiot"]));
        assert_eq!(v.encode("idiotic"), strs(&["idiot", "##ic"]));
    }

    #[test]
    fn unmatched_position_yields_unk_for_the_whole_word() {
        let v = vocab(&["a", "[UNK]"]);
        assert_eq!(v.encode("xyz"), strs(&["[UNK]"]));
        // Initial match but dead continuation also collapses to [UNK].
        assert_eq!(v.encode("ax"), strs(&["[UNK]"]));
    }

    #[test]
    fn longest_match_prefers_longer_initial_piece() {
        // Both "ab" and "a"+"##b..." could start the word; greedy picks "ab"
        // and then fails, it does not backtrack.
        let v = vocab(&["ab", "a", "##bc", "[UNK]"]);
        assert_eq!(v.encode("abc"), strs(&["[UNK]"]));
        assert_eq!(v.encode("ab"), strs(&["ab"]));
    }

    #[test]
    fn overlong_words_become_unk() {
        let v = WordpieceVocab::with_max_word_chars(strs(&["a", "##a", "[UNK]"]), 4).unwrap();
        assert_eq!(v.encode("aaaa"), strs(&["a", "##a", "##a", "##a"]));
        assert_eq!(v.encode("aaaaa"), strs(&["[UNK]"]));
    }

    #[test]
    fn vocabulary_validation() {
        assert!(matches!(
            WordpieceVocab::new(Vec::new()),
            Err(TokenizeError::EmptyVocab)
        ));
        assert!(matches!(
            WordpieceVocab::new(strs(&["un", "##aff"])),
            Err(TokenizeError::MissingUnk(_))
        ));
        assert!(matches!(
            WordpieceVocab::new(strs(&["[UNK]", "un", "un"])),
            Err(TokenizeError::DuplicateToken(t)) if t == "un"
        ));
        assert!(matches!(
            WordpieceVocab::new(strs(&["[UNK]", ""])),
            Err(TokenizeError::EmptyToken)
        ));
    }

    #[test]
    fn tokens_preserve_id_order() {
        let v = vocab(&["[UNK]", "un", "##aff", "##able"]);
        assert_eq!(v.tokens(), strs(&["[UNK]", "un", "##aff", "##able"]));
        assert_eq!(v.len(), 4);
        assert!(v.contains("##aff"));
        assert!(!v.contains("aff"));
    }
}
