//! Core algorithms for the subtext toolkit: text normalization, word and
//! subword tokenization (character n-grams, BPE, wordpiece), hashed
//! bag-of-features extraction, a softmax linear classifier trained with SGD,
//! and evaluation metrics with stratified cross-validation splitting.
//!
//! The crate is `no_std` + `alloc` so the algorithms can run in constrained
//! environments; all IO and file formats live in the companion `subtext`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod eval;
pub mod features;
pub mod model;
pub mod rng;
pub mod tokenize;
