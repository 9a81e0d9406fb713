//! Error type shared by the core modules.

use alloc::string::String;
use core::fmt;

use crate::corpus::LabeledSpan;

/// Errors raised by core operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Token text or POS tag violates the token invariants.
    InvalidToken(String),

    /// A span is out of range, empty, or overlaps its predecessor.
    InvalidSpan {
        span: LabeledSpan,
        length: usize,
        reason: &'static str,
    },

    /// A tag string outside the alphabet.
    UnknownTag(String),

    /// Two headlines share an id.
    DuplicateId(String),

    /// A headline without tokens.
    EmptyHeadline(String),

    /// An operation needed at least one headline.
    EmptyCorpus,

    /// Two sequences that must have equal length do not.
    LengthMismatch { expected: usize, found: usize },

    /// Invalid feature, training or grid configuration.
    InvalidConfig(String),

    /// The embedding family is enabled but no table was supplied.
    MissingEmbeddings,

    /// An embedding table violates its invariants.
    InvalidEmbedding(String),

    /// A prediction refers to a headline that is not in the gold corpus.
    UnknownHeadline(String),

    /// A non-finite value appeared while evaluating the objective.
    Divergence,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidToken(msg) => write!(f, "invalid token: {msg}"),
            Self::InvalidSpan {
                span,
                length,
                reason,
            } => write!(
                f,
                "invalid span ({}, {}, {}) for sentence of length {length}: {reason}",
                span.start,
                span.end,
                span.label.as_str()
            ),
            Self::UnknownTag(tag) => write!(f, "unknown tag {tag:?}"),
            Self::DuplicateId(id) => write!(f, "duplicate headline id {id:?}"),
            Self::EmptyHeadline(id) => write!(f, "headline {id:?} has no tokens"),
            Self::EmptyCorpus => f.write_str("corpus is empty"),
            Self::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Self::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Self::MissingEmbeddings => {
                f.write_str("embedding features are enabled but no embedding table was given")
            }
            Self::InvalidEmbedding(msg) => write!(f, "invalid embedding table: {msg}"),
            Self::UnknownHeadline(id) => write!(f, "prediction for unknown headline {id:?}"),
            Self::Divergence => f.write_str("objective became non-finite"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
