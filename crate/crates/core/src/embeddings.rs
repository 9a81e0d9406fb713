//! In-memory word vector tables with a fixed out-of-vocabulary policy.

use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::errors::{Error, Result};

/// A word → vector table where every vector has the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    name: String,
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
    zero: Vec<f64>,
    duplicates: usize,
}

impl EmbeddingTable {
    pub fn new(name: impl Into<String>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidEmbedding("dimension must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            dim,
            entries: HashMap::new(),
            zero: alloc::vec![0.0; dim],
            duplicates: 0,
        })
    }

    /// Adds a vector. A word that is already present keeps its first vector
    /// and the call returns `Ok(false)`.
    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<bool> {
        let word = word.into();
        if vector.len() != self.dim {
            return Err(Error::InvalidEmbedding(alloc::format!(
                "vector for {word:?} has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidEmbedding(alloc::format!(
                "vector for {word:?} has a non-finite component"
            )));
        }
        if self.entries.contains_key(&word) {
            self.duplicates += 1;
            return Ok(false);
        }
        self.entries.insert(word, vector);
        Ok(true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of insertions ignored because the word was already present.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    /// Exact match, then the lowercased word, then the zero vector.
    pub fn lookup(&self, word: &str) -> &[f64] {
        if let Some(v) = self.entries.get(word) {
            return v;
        }
        let lower = word.to_lowercase();
        if lower != word {
            if let Some(v) = self.entries.get(&lower) {
                return v;
            }
        }
        &self.zero
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new("t", 2).unwrap();
        t.insert("streaming", vec![0.5, -1.0]).unwrap();
        t.insert("Boom", vec![0.2, -0.4]).unwrap();
        t
    }

    #[test]
    fn lookup_policy() {
        let t = table();
        assert_eq!(t.lookup("Boom"), [0.2, -0.4]);
        assert_eq!(t.lookup("Streaming"), [0.5, -1.0]);
        assert_eq!(t.lookup("STREAMING"), [0.5, -1.0]);
        assert_eq!(t.lookup("boom"), [0.0, 0.0]);
        assert_eq!(t.lookup("zzz"), [0.0, 0.0]);
    }

    #[test]
    fn duplicates_keep_first() {
        let mut t = table();
        assert!(!t.insert("Boom", vec![9.0, 9.0]).unwrap());
        assert_eq!(t.duplicates(), 1);
        assert_eq!(t.lookup("Boom"), [0.2, -0.4]);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn rejects_bad_vectors() {
        let mut t = table();
        assert!(t.insert("x", vec![1.0]).is_err());
        assert!(t.insert("x", vec![f64::NAN, 1.0]).is_err());
        assert!(EmbeddingTable::new("z", 0).is_err());
    }
}
