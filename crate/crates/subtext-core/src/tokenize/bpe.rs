//! Byte pair encoding: learn a merge list from a word-frequency table, then
//! segment words by replaying the merges in training order.
//!
//! Training repeatedly merges the most frequent adjacent symbol pair,
//! weighting each word's pairs by the word's corpus frequency. Equal counts
//! are broken by lexicographic order of the `(left, right)` symbol strings,
//! and training stops early once the best pair occurs fewer than twice —
//! merging hapax pairs adds nothing. The trainer keeps pair counts
//! incrementally (recounting only the words a merge rewrites) but is
//! observationally identical to recounting every pair from scratch each
//! iteration.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Reverse;

use hashbrown::{HashMap, HashSet};

use super::{TokenStream, TokenizeError};

/// Suffix attached to every output piece except the last one.
pub const BPE_MARKER: &str = "@@";

/// An ordered BPE merge list. Encoding applies the merges in order, each as a
/// left-to-right non-overlapping pair replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    /// Per-merge character membership bloom; `encode` skips a merge when the
    /// word cannot contain all of the merge's characters.
    blooms: Vec<u64>,
}

/// Concatenates encoded pieces with the `@@` markers stripped, recovering the
/// original word.
pub fn strip_bpe_markers(pieces: &[String]) -> String {
    let mut out = String::new();
    for piece in pieces {
        out.push_str(piece.strip_suffix(BPE_MARKER).unwrap_or(piece));
    }
    out
}

fn char_bloom(s: &str) -> u64 {
    let mut b = 0u64;
    for c in s.chars() {
        b |= 1u64 << (c as u32 % 64);
    }
    b
}

/// Queue entries order by count, then by `Reverse` of the symbol strings, so
/// the set's maximum is the highest-count pair and, among equal counts, the
/// lexicographically smallest `(left, right)`.
type QueueKey = (u64, Reverse<(String, String)>, (u32, u32));

fn queue_key(symbols: &[String], pair: (u32, u32), count: u64) -> QueueKey {
    let left = symbols[pair.0 as usize].clone();
    let right = symbols[pair.1 as usize].clone();
    (count, Reverse((left, right)), pair)
}

fn intern(symbols: &mut Vec<String>, ids: &mut HashMap<String, u32>, s: &str) -> u32 {
    if let Some(&id) = ids.get(s) {
        return id;
    }
    let id = symbols.len() as u32;
    symbols.push(s.to_string());
    ids.insert(s.to_string(), id);
    id
}

/// Adjacent pairs of a symbol sequence with their occurrence counts. Words
/// are short, so a linear-probe vector beats a map here.
fn word_pair_occurrences(syms: &[u32]) -> Vec<((u32, u32), u64)> {
    let mut occ: Vec<((u32, u32), u64)> = Vec::new();
    for w in syms.windows(2) {
        let pair = (w[0], w[1]);
        match occ.iter_mut().find(|(p, _)| *p == pair) {
            Some((_, c)) => *c += 1,
            None => occ.push((pair, 1)),
        }
    }
    occ
}

/// One left-to-right non-overlapping replacement pass of `(a, b) -> merged`.
fn replace_pair(syms: &[u32], a: u32, b: u32, merged: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(syms.len());
    let mut i = 0;
    while i < syms.len() {
        if i + 1 < syms.len() && syms[i] == a && syms[i + 1] == b {
            out.push(merged);
            i += 2;
        } else {
            out.push(syms[i]);
            i += 1;
        }
    }
    out
}

impl BpeModel {
    /// Builds a model from an explicit merge list, rejecting duplicates.
    pub fn from_merges(merges: Vec<(String, String)>) -> Result<Self, TokenizeError> {
        {
            let mut seen: HashSet<&(String, String)> = HashSet::with_capacity(merges.len());
            for merge in &merges {
                if !seen.insert(merge) {
                    return Err(TokenizeError::DuplicateMerge {
                        left: merge.0.clone(),
                        right: merge.1.clone(),
                    });
                }
            }
        }
        Ok(Self::from_merges_unchecked(merges))
    }

    fn from_merges_unchecked(merges: Vec<(String, String)>) -> Self {
        let blooms = merges
            .iter()
            .map(|(l, r)| char_bloom(l) | char_bloom(r))
            .collect();
        BpeModel { merges, blooms }
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn num_merges(&self) -> usize {
        self.merges.len()
    }

    /// Learns up to `num_merges` merges from a word-frequency table.
    ///
    /// Duplicate words have their frequencies summed and zero-frequency words
    /// are ignored. The result does not depend on input order: words are
    /// sorted internally and every selection goes through the ordered queue.
    pub fn train<'a, I>(corpus: I, num_merges: usize) -> Result<Self, TokenizeError>
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let mut items: Vec<(&'a str, u64)> =
            corpus.into_iter().filter(|(_, f)| *f > 0).collect();
        items.sort_unstable_by_key(|(w, _)| *w);
        let mut table: Vec<(&str, u64)> = Vec::with_capacity(items.len());
        for (word, freq) in items {
            match table.last_mut() {
                Some((w, f)) if *w == word => *f += freq,
                _ => table.push((word, freq)),
            }
        }
        if table.is_empty() {
            return Err(TokenizeError::EmptyCorpus);
        }

        let mut symbols: Vec<String> = Vec::new();
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut words: Vec<(Vec<u32>, u64)> = table
            .iter()
            .map(|(word, freq)| {
                let syms = word
                    .chars()
                    .map(|c| {
                        let mut buf = [0u8; 4];
                        intern(&mut symbols, &mut ids, c.encode_utf8(&mut buf))
                    })
                    .collect();
                (syms, *freq)
            })
            .collect();

        let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
        let mut postings: HashMap<(u32, u32), BTreeSet<usize>> = HashMap::new();
        for (widx, (syms, freq)) in words.iter().enumerate() {
            for (pair, occ) in word_pair_occurrences(syms) {
                *counts.entry(pair).or_insert(0) += occ * *freq;
                postings.entry(pair).or_default().insert(widx);
            }
        }
        let mut queue: BTreeSet<QueueKey> = counts
            .iter()
            .map(|(&pair, &count)| queue_key(&symbols, pair, count))
            .collect();

        let mut merges: Vec<(String, String)> = Vec::with_capacity(num_merges.min(1024));
        while merges.len() < num_merges {
            let Some(top) = queue.last() else { break };
            let (count, pair) = (top.0, top.2);
            if count < 2 {
                break;
            }
            let left = symbols[pair.0 as usize].clone();
            let right = symbols[pair.1 as usize].clone();
            let merged_id = intern(&mut symbols, &mut ids, &format!("{left}{right}"));
            merges.push((left, right));

            let affected: Vec<usize> = postings
                .get(&pair)
                .map(|set| set.iter().copied().collect())
                .unwrap_or_default();
            for widx in affected {
                let freq = words[widx].1;
                let syms = core::mem::take(&mut words[widx].0);
                // Retract this word's entire pair contribution, rewrite it,
                // then re-add — simpler than neighborhood surgery and only
                // touches words that actually contain the merged pair.
                for (p, occ) in word_pair_occurrences(&syms) {
                    let old = counts[&p];
                    let new = old - occ * freq;
                    queue.remove(&queue_key(&symbols, p, old));
                    if new > 0 {
                        queue.insert(queue_key(&symbols, p, new));
                        counts.insert(p, new);
                    } else {
                        counts.remove(&p);
                    }
                    let set = postings.get_mut(&p).expect("posting for counted pair");
                    set.remove(&widx);
                    if set.is_empty() {
                        postings.remove(&p);
                    }
                }
                let new_syms = replace_pair(&syms, pair.0, pair.1, merged_id);
                for (p, occ) in word_pair_occurrences(&new_syms) {
                    let old = counts.get(&p).copied().unwrap_or(0);
                    if old > 0 {
                        queue.remove(&queue_key(&symbols, p, old));
                    }
                    let new = old + occ * freq;
                    counts.insert(p, new);
                    queue.insert(queue_key(&symbols, p, new));
                    postings.entry(p).or_default().insert(widx);
                }
                words[widx].0 = new_syms;
            }
            debug_assert!(!counts.contains_key(&pair), "merged pair fully retired");
        }
        Ok(Self::from_merges_unchecked(merges))
    }

    /// Segments a word: split into characters, replay every merge in training
    /// order, then mark all pieces but the last with `@@`. Characters never
    /// seen in training simply stay unmerged, so stripping the markers and
    /// concatenating always reproduces the word.
    pub fn encode(&self, word: &str) -> TokenStream {
        let mut pieces: Vec<String> = word.chars().map(|c| c.to_string()).collect();
        if pieces.is_empty() {
            return pieces;
        }
        let word_bloom = char_bloom(word);
        for (i, (left, right)) in self.merges.iter().enumerate() {
            if pieces.len() < 2 {
                break;
            }
            if self.blooms[i] & !word_bloom != 0 {
                continue;
            }
            let mut j = 0;
            while j + 1 < pieces.len() {
                if pieces[j] == *left && pieces[j + 1] == *right {
                    let right_piece = pieces.remove(j + 1);
                    pieces[j].push_str(&right_piece);
                }
                j += 1;
            }
        }
        let last = pieces.len() - 1;
        for piece in &mut pieces[..last] {
            piece.push_str(BPE_MARKER);
        }
        pieces
    }
}
