//! Mapping token streams to integer feature ids: a learned word vocabulary
//! occupies ids `0..V`, and word bigrams plus subword character n-grams are
//! hashed into a fixed bucket space `V..V+B` (the hashing trick — collisions
//! are accepted rather than stored).
//!
//! Hashing is FNV-1a over UTF-8 bytes, 32-bit wrapping arithmetic, so feature
//! ids are identical across runs and platforms.

use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::tokenize::{
    extract_subword_ngrams, is_sentinel, BPE_MARKER, CONTINUATION_MARKER,
};

/// Feature ids of one document, with repetition; every id is `< V + B`.
pub type FeatureVector = Vec<u32>;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("bucket count must be at least 1 to hash features")]
    ZeroBuckets,
    #[error("word n-gram order must be 1 or 2, got {0}")]
    BadNgramOrder(usize),
    #[error("invalid subword range {min}..={max} (use 0,0 to disable)")]
    BadSubwordRange { min: usize, max: usize },
    #[error("feature space {words} words + {buckets} buckets exceeds the 32-bit id range")]
    SpaceTooLarge { words: usize, buckets: u32 },
    #[error("duplicate vocabulary token `{0}`")]
    DuplicateVocabToken(String),
}

/// Configuration of the feature id space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FeatureConfig {
    /// Tokens below this training frequency stay out of the word vocabulary.
    pub min_count: u64,
    /// Size of the hashed bucket region `B`.
    pub bucket_count: u32,
    /// 1 = unigrams only; 2 = also hash every adjacent-token bigram.
    pub word_ngram_order: usize,
    /// Subword n-gram length range; `(0, 0)` disables subwords.
    pub subword_min: usize,
    pub subword_max: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            min_count: 1,
            bucket_count: 2_000_000,
            word_ngram_order: 1,
            subword_min: 0,
            subword_max: 0,
        }
    }
}

impl FeatureConfig {
    pub fn subwords_enabled(&self) -> bool {
        self.subword_min > 0
    }

    /// Checks internal consistency; hashing (bigrams or subwords) requires a
    /// non-empty bucket region.
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.word_ngram_order == 0 || self.word_ngram_order > 2 {
            return Err(FeatureError::BadNgramOrder(self.word_ngram_order));
        }
        match (self.subword_min, self.subword_max) {
            (0, 0) => {}
            (min, max) if min >= 1 && min <= max => {}
            (min, max) => return Err(FeatureError::BadSubwordRange { min, max }),
        }
        if (self.word_ngram_order == 2 || self.subwords_enabled()) && self.bucket_count == 0 {
            return Err(FeatureError::ZeroBuckets);
        }
        Ok(())
    }
}

/// FNV-1a over the UTF-8 bytes of `s`: offset basis 2166136261, prime
/// 16777619, wrapping 32-bit arithmetic.
pub fn fnv1a32(s: &str) -> u32 {
    let mut h: u32 = 2_166_136_261;
    for &b in s.as_bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(16_777_619);
    }
    h
}

/// Hashed feature id `V + (fnv1a32(s) mod B)`.
pub fn hash_bucket(s: &str, v: u32, b: u32) -> Result<u32, FeatureError> {
    if b == 0 {
        return Err(FeatureError::ZeroBuckets);
    }
    let id = v as u64 + (fnv1a32(s) % b) as u64;
    u32::try_from(id).map_err(|_| FeatureError::SpaceTooLarge {
        words: v as usize,
        buckets: b,
    })
}

/// Word vocabulary plus hashing configuration; immutable once built.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    ids: HashMap<String, u32>,
    /// `(token, training count)` in id order, for export and serialization.
    entries: Vec<(String, u64)>,
    config: FeatureConfig,
}

impl FeatureSpace {
    /// Learns the word vocabulary from encoded token streams: every token
    /// occurring at least `min_count` times gets an id, assigned in
    /// descending frequency order with lexicographic tie-breaks.
    pub fn build(streams: &[Vec<String>], config: FeatureConfig) -> Result<Self, FeatureError> {
        config.validate()?;
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for stream in streams {
            for token in stream {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= config.min_count)
            .map(|(t, c)| (String::from(t), c))
            .collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_entries(entries, config)
    }

    /// Rebuilds a space from serialized `(token, count)` entries whose index
    /// is the word id.
    pub fn from_entries(
        entries: Vec<(String, u64)>,
        config: FeatureConfig,
    ) -> Result<Self, FeatureError> {
        config.validate()?;
        let v = entries.len();
        if v as u64 + config.bucket_count as u64 > u32::MAX as u64 {
            return Err(FeatureError::SpaceTooLarge {
                words: v,
                buckets: config.bucket_count,
            });
        }
        let mut ids = HashMap::with_capacity(v);
        for (i, (token, _)) in entries.iter().enumerate() {
            if ids.insert(token.clone(), i as u32).is_some() {
                return Err(FeatureError::DuplicateVocabToken(token.clone()));
            }
        }
        Ok(FeatureSpace {
            ids,
            entries,
            config,
        })
    }

    /// Vocabulary size `V`; word ids are `0..V`.
    pub fn vocab_size(&self) -> u32 {
        self.entries.len() as u32
    }

    /// Total id space `V + B`; embedding matrices need this many rows.
    pub fn total_features(&self) -> u32 {
        self.vocab_size() + self.config.bucket_count
    }

    pub fn word_id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    /// `(token, training count)` entries in id order.
    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    fn hash_id(&self, s: &str) -> u32 {
        debug_assert!(self.config.bucket_count > 0, "validated at construction");
        self.vocab_size() + fnv1a32(s) % self.config.bucket_count
    }

    /// Maps a token stream to feature ids: in-vocabulary word ids first, then
    /// hashed bigram ids when `word_ngram_order` is 2, then hashed subword
    /// ids per token. Out-of-vocabulary tokens contribute only their
    /// subwords. Sentinels (`<url>`, `<user>`) and pieces carrying a `@@` or
    /// `##` marker are exempt from subword extraction so segmenter output is
    /// not decomposed twice.
    pub fn featurize(&self, tokens: &[String]) -> FeatureVector {
        let mut ids = Vec::new();
        for token in tokens {
            if let Some(&id) = self.ids.get(token) {
                ids.push(id);
            }
        }
        if self.config.word_ngram_order == 2 {
            for pair in tokens.windows(2) {
                let mut bigram = String::with_capacity(pair[0].len() + 1 + pair[1].len());
                bigram.push_str(&pair[0]);
                bigram.push(' ');
                bigram.push_str(&pair[1]);
                ids.push(self.hash_id(&bigram));
            }
        }
        if self.config.subwords_enabled() {
            for token in tokens {
                if token.is_empty()
                    || is_sentinel(token)
                    || token.contains(BPE_MARKER)
                    || token.contains(CONTINUATION_MARKER)
                {
                    continue;
                }
                let subwords = extract_subword_ngrams(
                    token,
                    self.config.subword_min,
                    self.config.subword_max,
                )
                .expect("range validated at construction, token non-empty");
                for sub in &subwords {
                    ids.push(self.hash_id(sub));
                }
            }
        }
        ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn strs(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn word_only(min_count: u64) -> FeatureConfig {
        FeatureConfig {
            min_count,
            bucket_count: 0,
            word_ngram_order: 1,
            subword_min: 0,
            subword_max: 0,
        }
    }

    #[test]
    fn vocabulary_orders_by_frequency_then_token() {
        let streams = vec![strs(&["a", "a", "a", "b"])];
        let space = FeatureSpace::build(&streams, word_only(1)).unwrap();
        assert_eq!(space.word_id("a"), Some(0));
        assert_eq!(space.word_id("b"), Some(1));
        assert_eq!(space.vocab_size(), 2);
        assert_eq!(space.entries(), [("a".to_string(), 3), ("b".to_string(), 1)]);
    }

    #[test]
    fn min_count_filters_rare_tokens() {
        let streams = vec![strs(&["a", "a", "a", "b"])];
        let space = FeatureSpace::build(&streams, word_only(2)).unwrap();
        assert_eq!(space.word_id("a"), Some(0));
        assert_eq!(space.word_id("b"), None);
        assert_eq!(space.vocab_size(), 1);
    }

    #[test]
    fn frequency_ties_break_lexicographically() {
        let streams = vec![strs(&["b", "a", "b", "a"])];
        let space = FeatureSpace::build(&streams, word_only(1)).unwrap();
        assert_eq!(space.word_id("a"), Some(0));
        assert_eq!(space.word_id("b"), Some(1));
    }

    #[test]
    fn fnv1a_matches_reference_values() {
        assert_eq!(fnv1a32(""), 2_166_136_261);
        assert_eq!(fnv1a32("a"), 0xE40C_292C);
        assert_eq!(hash_bucket("", 10, 1000).unwrap(), 10 + 2_166_136_261 % 1000);
        assert_eq!(
            hash_bucket("a", 7, 13).unwrap(),
            7 + 3_826_002_220u32 % 13
        );
        assert_eq!(hash_bucket("x", 0, 0), Err(FeatureError::ZeroBuckets));
        assert_eq!(hash_bucket("x", 5, 9).unwrap(), hash_bucket("x", 5, 9).unwrap());
    }

    #[test]
    fn word_only_oov_has_no_features() {
        let streams = vec![strs(&["you", "fool"])];
        let space = FeatureSpace::build(&streams, word_only(1)).unwrap();
        assert_eq!(space.featurize(&strs(&["entirely", "unseen"])), Vec::<u32>::new());
    }

    #[test]
    fn repeated_tokens_repeat_their_ids() {
        let streams = vec![strs(&["you"])];
        let space = FeatureSpace::build(&streams, word_only(1)).unwrap();
        assert_eq!(space.featurize(&strs(&["you", "you"])), [0, 0]);
    }

    #[test]
    fn oov_token_with_subwords_gets_exactly_the_formula_count() {
        let streams = vec![strs(&["seen"])];
        let config = FeatureConfig {
            subword_min: 2,
            subword_max: 6,
            bucket_count: 1 << 20,
            ..FeatureConfig::default()
        };
        let space = FeatureSpace::build(&streams, config).unwrap();
        // "idiotic" has 7 chars, wrapped 9: Σ_{n=2..6} (10−n) = 8+7+6+5+4.
        let fv = space.featurize(&strs(&["idiotic"]));
        assert_eq!(fv.len(), 30);
        let v = space.vocab_size();
        assert!(fv.iter().all(|&id| id >= v && id < space.total_features()));
    }

    #[test]
    fn bigrams_are_hashed_when_order_two() {
        let streams = vec![strs(&["good", "day"])];
        let config = FeatureConfig {
            word_ngram_order: 2,
            bucket_count: 4096,
            ..FeatureConfig::default()
        };
        let space = FeatureSpace::build(&streams, config).unwrap();
        let fv = space.featurize(&strs(&["good", "day"]));
        // Two word ids plus one hashed bigram.
        assert_eq!(fv.len(), 3);
        let expected = hash_bucket("good day", space.vocab_size(), 4096).unwrap();
        assert_eq!(fv[2], expected);
    }

    #[test]
    fn markers_and_sentinels_are_exempt_from_subwords() {
        let streams = vec![strs(&["ki"])];
        let config = FeatureConfig {
            subword_min: 2,
            subword_max: 3,
            bucket_count: 1024,
            ..FeatureConfig::default()
        };
        let space = FeatureSpace::build(&streams, config).unwrap();
        let marked = space.featurize(&strs(&["wi@@", "##ki", "<url>", "<user>"]));
        assert_eq!(marked.len(), 0, "no word ids, no subwords");
        // The unmarked final BPE piece does get subwords.
        let plain = space.featurize(&strs(&["ki"]));
        assert_eq!(plain.len(), 1 + 3 + 2); // word id + n=2 of "<ki>" + n=3
    }

    #[test]
    fn config_validation_catches_inconsistencies() {
        assert_eq!(
            FeatureConfig {
                word_ngram_order: 3,
                ..FeatureConfig::default()
            }
            .validate(),
            Err(FeatureError::BadNgramOrder(3))
        );
        assert_eq!(
            FeatureConfig {
                subword_min: 4,
                subword_max: 2,
                ..FeatureConfig::default()
            }
            .validate(),
            Err(FeatureError::BadSubwordRange { min: 4, max: 2 })
        );
        assert_eq!(
            FeatureConfig {
                word_ngram_order: 2,
                bucket_count: 0,
                ..FeatureConfig::default()
            }
            .validate(),
            Err(FeatureError::ZeroBuckets)
        );
        assert!(word_only(1).validate().is_ok());
    }

    #[test]
    fn from_entries_round_trips_and_rejects_duplicates() {
        let streams = vec![strs(&["a", "b", "a"])];
        let space = FeatureSpace::build(&streams, word_only(1)).unwrap();
        let rebuilt =
            FeatureSpace::from_entries(space.entries().to_vec(), *space.config()).unwrap();
        assert_eq!(rebuilt.word_id("a"), space.word_id("a"));
        assert_eq!(rebuilt.word_id("b"), space.word_id("b"));

        let dup = vec![("a".to_string(), 2), ("a".to_string(), 1)];
        assert_eq!(
            FeatureSpace::from_entries(dup, word_only(1)).unwrap_err(),
            FeatureError::DuplicateVocabToken("a".to_string())
        );
    }
}
