//! File formats, feed ingestion, parallel sweeps and the command line for
//! the borrowing tagger in `borrowtag-core`.

pub mod cli;
pub mod config;
pub mod corpus_io;
pub mod embeddings_io;
pub mod errors;
pub mod ingest;
pub mod model_io;
pub mod parallel;
pub mod report;

pub use errors::{Error, Result};
