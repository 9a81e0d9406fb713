//! Linear-chain conditional random field.
//!
//! Parameters live in one flat vector laid out by [`Layout`]: state weights
//! `W[attribute][label]`, then transitions `T[prev][cur]`, then start weights
//! `S[label]` and end weights `E[label]`. The score of a label path `y` is
//!
//! ```text
//! S[y0] + sum_t sum_(a,v) v * W[a][y_t] + sum_(t>=1) T[y_(t-1)][y_t] + E[y_(n-1)]
//! ```
//!
//! Training minimizes the negative log-likelihood plus
//! `c1 * |w|_1 + (c2 / 2) * |w|_2^2` with [`crate::optim::minimize`].

mod inference;
mod objective;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{bio_to_spans, Corpus, Headline, LabeledSpan, Tag, TagAlphabet};
use crate::embeddings::EmbeddingTable;
use crate::errors::{Error, Result};
use crate::features::{build_index, windowed_attributes, AttributeVector, FeatureConfig, FeatureIndex};
use crate::optim::{self, LbfgsParams, Termination};

pub use inference::{log_partition, marginals, score, viterbi};
pub use objective::{nll_and_gradient, Instance};

/// Attribute ids and values active at one position.
pub type Position = Vec<(u32, f64)>;

/// Shape of the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub attributes: usize,
    pub labels: usize,
}

impl Layout {
    pub const fn new(attributes: usize, labels: usize) -> Self {
        Self { attributes, labels }
    }

    /// `K*L + L*L + 2L`
    pub const fn len(&self) -> usize {
        self.attributes * self.labels + self.labels * self.labels + 2 * self.labels
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn state(&self, attribute: usize, label: usize) -> usize {
        attribute * self.labels + label
    }

    #[inline]
    pub const fn transition(&self, prev: usize, cur: usize) -> usize {
        self.attributes * self.labels + prev * self.labels + cur
    }

    #[inline]
    pub const fn start(&self, label: usize) -> usize {
        self.attributes * self.labels + self.labels * self.labels + label
    }

    #[inline]
    pub const fn end(&self, label: usize) -> usize {
        self.start(label) + self.labels
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// L1 coefficient.
    pub c1: f64,
    /// L2 coefficient; the penalty is `(c2 / 2) * |w|^2`.
    pub c2: f64,
    /// Relative-improvement stopping threshold.
    pub delta: f64,
    /// Iterations over which the improvement is measured.
    pub period: usize,
    pub max_iterations: usize,
    pub lbfgs_memory: usize,
    /// Gradient-norm stopping threshold.
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c1: 0.05,
            c2: 0.01,
            delta: 1e-3,
            period: 10,
            max_iterations: usize::MAX,
            lbfgs_memory: 6,
            epsilon: 1e-5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.c1.is_finite() && self.c1 >= 0.0) {
            return bad(format!("c1 must be >= 0, got {}", self.c1));
        }
        if !(self.c2.is_finite() && self.c2 >= 0.0) {
            return bad(format!("c2 must be >= 0, got {}", self.c2));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad(format!("delta must be > 0, got {}", self.delta));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if self.period == 0 {
            return bad("period must be at least 1".into());
        }
        if self.lbfgs_memory == 0 {
            return bad("lbfgs_memory must be at least 1".into());
        }
        Ok(())
    }

    fn optimizer_params(&self) -> LbfgsParams {
        LbfgsParams {
            memory: self.lbfgs_memory,
            c1: self.c1,
            delta: self.delta,
            period: self.period,
            max_iterations: self.max_iterations,
            epsilon: self.epsilon,
            ..LbfgsParams::default()
        }
    }
}

/// A trained tagger: alphabet, frozen attribute index and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    alphabet: TagAlphabet,
    index: FeatureIndex,
    features: FeatureConfig,
    train_config: TrainConfig,
    layout: Layout,
    weights: Vec<f64>,
}

impl CrfModel {
    pub fn new(
        alphabet: TagAlphabet,
        mut index: FeatureIndex,
        features: FeatureConfig,
        train_config: TrainConfig,
        weights: Vec<f64>,
    ) -> Result<Self> {
        index.freeze();
        let layout = Layout::new(index.len(), alphabet.len());
        if weights.len() != layout.len() {
            return Err(Error::LengthMismatch {
                expected: layout.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence);
        }
        features.validate()?;
        Ok(Self {
            alphabet,
            index,
            features,
            train_config,
            layout,
            weights,
        })
    }

    /// A model whose weights are all zero.
    pub fn zeros(alphabet: TagAlphabet, index: FeatureIndex, features: FeatureConfig) -> Result<Self> {
        let len = Layout::new(index.len(), alphabet.len()).len();
        Self::new(alphabet, index, features, TrainConfig::default(), vec![0.0; len])
    }

    pub fn alphabet(&self) -> TagAlphabet {
        self.alphabet
    }

    pub fn index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn features(&self) -> &FeatureConfig {
        &self.features
    }

    pub fn train_config(&self) -> &TrainConfig {
        &self.train_config
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn state_weight(&self, attribute: u32, label: usize) -> f64 {
        self.weights[self.layout.state(attribute as usize, label)]
    }

    pub fn transition_weight(&self, prev: usize, cur: usize) -> f64 {
        self.weights[self.layout.transition(prev, cur)]
    }

    pub fn start_weight(&self, label: usize) -> f64 {
        self.weights[self.layout.start(label)]
    }

    pub fn end_weight(&self, label: usize) -> f64 {
        self.weights[self.layout.end(label)]
    }

    /// Number of weights that are exactly zero.
    pub fn zero_weights(&self) -> usize {
        self.weights.iter().filter(|w| **w == 0.0).count()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.weights.iter().map(|w| w * w).sum())
    }

    /// Maps attribute names to ids, dropping names the index does not know.
    pub fn encode(&self, attrs: &[AttributeVector]) -> Vec<Position> {
        encode(&self.index, attrs)
    }

    fn label_indices(&self, tags: &[Tag]) -> Result<Vec<usize>> {
        tags.iter()
            .map(|&t| {
                self.alphabet
                    .index_of(t)
                    .ok_or_else(|| Error::UnknownTag(t.as_str().into()))
            })
            .collect()
    }

    pub fn score_sequence(&self, attrs: &[AttributeVector], tags: &[Tag]) -> Result<f64> {
        if attrs.len() != tags.len() {
            return Err(Error::LengthMismatch {
                expected: attrs.len(),
                found: tags.len(),
            });
        }
        let path = self.label_indices(tags)?;
        score(self.layout, &self.weights, &self.encode(attrs), &path)
    }

    pub fn log_partition(&self, attrs: &[AttributeVector]) -> f64 {
        log_partition(self.layout, &self.weights, &self.encode(attrs))
    }

    pub fn viterbi(&self, attrs: &[AttributeVector]) -> Vec<Tag> {
        viterbi(self.layout, &self.weights, &self.encode(attrs))
            .into_iter()
            .map(|y| self.alphabet.tag(y))
            .collect()
    }

    /// Decodes one headline into predicted spans.
    pub fn tag_headline(
        &self,
        headline: &Headline,
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<Vec<LabeledSpan>> {
        if headline.tokens.is_empty() {
            log::warn!("skipping headline {:?} without tokens", headline.id);
            return Ok(Vec::new());
        }
        let attrs = windowed_attributes(headline, &self.features, embeddings)?;
        Ok(bio_to_spans(&self.viterbi(&attrs)))
    }
}

pub fn encode(index: &FeatureIndex, attrs: &[AttributeVector]) -> Vec<Position> {
    attrs
        .iter()
        .map(|a| a.iter().filter_map(|(name, v)| index.get(name).map(|id| (id, v))).collect())
        .collect()
}

/// Predicted spans for every headline, in corpus order. Gold spans are not
/// consulted.
pub fn tag(
    model: &CrfModel,
    corpus: &Corpus,
    embeddings: Option<&EmbeddingTable>,
) -> Result<Vec<Vec<LabeledSpan>>> {
    corpus
        .headlines()
        .iter()
        .map(|h| model.tag_headline(h, embeddings))
        .collect()
}

/// Outcome of a training run besides the model itself.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    /// Full objective at w = 0 followed by one entry per accepted iteration.
    pub objective_trace: Vec<f64>,
    pub termination: Termination,
}

impl TrainReport {
    /// True when the line search gave up and the model is the best point
    /// found before that.
    pub fn line_search_failed(&self) -> bool {
        self.termination == Termination::LineSearchFailed
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: CrfModel,
    pub report: TrainReport,
}

/// Encodes a corpus for training under `alphabet`.
pub fn training_instances(
    corpus: &Corpus,
    index: &FeatureIndex,
    features: &FeatureConfig,
    embeddings: Option<&EmbeddingTable>,
    alphabet: TagAlphabet,
) -> Result<Vec<Instance>> {
    corpus
        .headlines()
        .iter()
        .map(|h| {
            let attrs = windowed_attributes(h, features, embeddings)?;
            let gold: Vec<LabeledSpan> =
                h.gold.iter().copied().filter(|s| alphabet.keeps(s.label)).collect();
            let tags = crate::corpus::spans_to_bio(&gold, h.tokens.len())?;
            let labels = tags
                .iter()
                .map(|&t| alphabet.index_of(t).ok_or_else(|| Error::UnknownTag(t.as_str().into())))
                .collect::<Result<Vec<_>>>()?;
            Ok(Instance {
                positions: encode(index, &attrs),
                labels,
            })
        })
        .collect()
}

/// Trains a model from w = 0.
///
/// Spans whose label `alphabet` does not keep are treated as outside. When
/// `config.c1 > 0` the L1 term is handled by the orthant-wise optimizer.
pub fn train(
    corpus: &Corpus,
    features: &FeatureConfig,
    embeddings: Option<&EmbeddingTable>,
    alphabet: TagAlphabet,
    config: &TrainConfig,
) -> Result<Trained> {
    config.validate()?;
    features.validate()?;
    let index = build_index(corpus, features, embeddings)?;
    let data = training_instances(corpus, &index, features, embeddings, alphabet)?;
    let layout = Layout::new(index.len(), alphabet.len());
    let c2 = config.c2;
    let minimum = optim::minimize(
        |w| nll_and_gradient(layout, w, &data, c2),
        vec![0.0; layout.len()],
        &config.optimizer_params(),
    )?;
    let report = TrainReport {
        iterations: minimum.iterations,
        objective_trace: minimum.trace,
        termination: minimum.termination,
    };
    let model = CrfModel::new(alphabet, index, *features, *config, minimum.x)?;
    Ok(Trained { model, report })
}
