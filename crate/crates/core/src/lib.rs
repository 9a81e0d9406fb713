//! Sequence labeling for unassimilated lexical borrowings in headlines.
//!
//! This crate holds everything that does not touch the filesystem: the
//! span/BIO data model, feature extraction, a linear-chain CRF with an
//! orthant-wise L-BFGS trainer, exact-match span evaluation and the tuning
//! harness. It only needs `alloc`.
//!
//! File formats, parallel sweeps and the command line live in the
//! `borrowtag` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod crf;
pub mod embeddings;
pub mod errors;
pub mod eval;
pub mod features;
pub mod optim;
pub mod tune;

pub use corpus::{Corpus, Headline, Label, LabeledSpan, Tag, TagAlphabet, Token};
pub use crf::{CrfModel, TrainConfig};
pub use embeddings::EmbeddingTable;
pub use errors::{Error, Result};
pub use eval::{EvalMode, EvalReport};
pub use features::{Family, FeatureConfig, FeatureIndex};
