//! File formats, experiment orchestration, and the command-line interface
//! around [`subtext_core`]: TSV dataset ingestion, BPE merge and wordpiece
//! vocabulary files, word2vec-text pretrained embeddings, a self-contained
//! binary model artifact, and stdout/JSON evaluation reports.

pub mod bpe_io;
pub mod cli;
pub mod dataset_io;
pub mod embedding_io;
pub mod model_io;
pub mod report;
pub mod run;
pub mod wordpiece_io;
