//! Grid search over regularization and embedding settings, and the
//! one-family-at-a-time ablation harness.
//!
//! Every run trains with OTHER ignored and is scored by ENG span F1 on the
//! development corpus. The sequential drivers here define the result order;
//! parallel drivers must merge their results back into the same order.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::{Corpus, TagAlphabet};
use crate::crf::{tag, train, TrainConfig};
use crate::embeddings::EmbeddingTable;
use crate::errors::{Error, Result};
use crate::eval::{evaluate_pairs, EvalMode, EvalReport};
use crate::features::{Family, FeatureConfig};
use crate::optim::Termination;

/// Embedding entry of a grid that disables the embedding family.
pub const NO_EMBEDDINGS: &str = "none";

/// The values to sweep. Embedding entries are table names, or
/// [`NO_EMBEDDINGS`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub scaling: Vec<f64>,
    pub embeddings: Vec<String>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let lists = [("c1", &self.c1), ("c2", &self.c2), ("scaling", &self.scaling)];
        for (name, values) in lists {
            if values.is_empty() {
                return Err(Error::InvalidConfig(alloc::format!("grid {name} list is empty")));
            }
            if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "grid {name} values must be finite and non-negative"
                )));
            }
        }
        if self.scaling.contains(&0.0) {
            return Err(Error::InvalidConfig("grid scaling values must be positive".into()));
        }
        if self.embeddings.is_empty() {
            return Err(Error::InvalidConfig("grid embeddings list is empty".into()));
        }
        Ok(())
    }

    /// Points in enumeration order: c1 outermost, embeddings innermost.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut points = Vec::with_capacity(self.len());
        for &c1 in &self.c1 {
            for &c2 in &self.c2 {
                for &scaling in &self.scaling {
                    for embedding in 0..self.embeddings.len() {
                        points.push(GridPoint {
                            c1,
                            c2,
                            scaling,
                            embedding,
                        });
                    }
                }
            }
        }
        points
    }

    pub fn len(&self) -> usize {
        self.c1.len() * self.c2.len() * self.scaling.len() * self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One grid configuration; `embedding` indexes [`GridSpec::embeddings`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub c1: f64,
    pub c2: f64,
    pub scaling: f64,
    pub embedding: usize,
}

/// Development-set result of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunScore {
    pub report: EvalReport,
    pub iterations: usize,
    pub termination: Termination,
}

impl RunScore {
    pub fn f1(&self) -> f64 {
        self.report.eng.f1()
    }
}

/// Corpora and optimizer settings shared by every run of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct Experiment<'a> {
    pub train: &'a Corpus,
    pub dev: &'a Corpus,
    pub train_config: &'a TrainConfig,
}

impl Experiment<'_> {
    /// Trains with OTHER ignored and scores ENG spans on the dev corpus.
    pub fn run(
        &self,
        features: &FeatureConfig,
        embeddings: Option<&EmbeddingTable>,
        train_config: &TrainConfig,
    ) -> Result<RunScore> {
        let trained = train(self.train, features, embeddings, TagAlphabet::IgnoreOther, train_config)?;
        let predicted = tag(&trained.model, self.dev, embeddings)?;
        let report = evaluate_pairs(
            self.dev
                .headlines()
                .iter()
                .zip(&predicted)
                .map(|(h, p)| (h.gold.as_slice(), p.as_slice())),
            EvalMode::WithoutOther,
        );
        Ok(RunScore {
            report,
            iterations: trained.report.iterations,
            termination: trained.report.termination,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub point: GridPoint,
    /// A failed run is kept with its error; it does not stop the sweep.
    pub score: Result<RunScore>,
}

/// Trains and scores one grid point. `tables` is aligned with the grid's
/// embedding list; `None` disables the embedding family.
pub fn run_point(
    experiment: &Experiment<'_>,
    base: &FeatureConfig,
    tables: &[Option<&EmbeddingTable>],
    point: GridPoint,
) -> PointOutcome {
    let mut features = *base;
    features.embedding_scaling = point.scaling;
    let table = tables.get(point.embedding).copied().flatten();
    if table.is_some() {
        features.families.insert(Family::Embedding);
    } else {
        features.families.remove(Family::Embedding);
    }
    let config = TrainConfig {
        c1: point.c1,
        c2: point.c2,
        ..*experiment.train_config
    };
    PointOutcome {
        point,
        score: experiment.run(&features, table, &config),
    }
}

/// All grid outcomes in enumeration order plus their ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub outcomes: Vec<PointOutcome>,
    /// Indices into `outcomes`, best first. Failed points come last, in
    /// enumeration order.
    pub ranking: Vec<usize>,
}

fn rank_order(a: &PointOutcome, b: &PointOutcome) -> Ordering {
    match (&a.score, &b.score) {
        (Ok(sa), Ok(sb)) => sb
            .f1()
            .total_cmp(&sa.f1())
            .then(a.point.c1.total_cmp(&b.point.c1))
            .then(a.point.c2.total_cmp(&b.point.c2))
            .then(a.point.scaling.total_cmp(&b.point.scaling))
            .then(a.point.embedding.cmp(&b.point.embedding)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => Ordering::Equal,
    }
}

impl TuneResult {
    pub fn from_outcomes(outcomes: Vec<PointOutcome>) -> Self {
        let mut ranking: Vec<usize> = (0..outcomes.len()).collect();
        // stable sort keeps failed points in enumeration order
        ranking.sort_by(|&i, &j| rank_order(&outcomes[i], &outcomes[j]));
        Self { outcomes, ranking }
    }

    pub fn best(&self) -> Option<&PointOutcome> {
        self.ranking
            .first()
            .map(|&i| &self.outcomes[i])
            .filter(|o| o.score.is_ok())
    }

    pub fn ranked(&self) -> impl Iterator<Item = &PointOutcome> {
        self.ranking.iter().map(|&i| &self.outcomes[i])
    }
}

/// Sequential grid search.
pub fn grid_search(
    experiment: &Experiment<'_>,
    base: &FeatureConfig,
    spec: &GridSpec,
    tables: &[Option<&EmbeddingTable>],
) -> Result<TuneResult> {
    spec.validate()?;
    check_tables(spec, tables)?;
    let outcomes = spec
        .points()
        .into_iter()
        .map(|p| run_point(experiment, base, tables, p))
        .collect();
    Ok(TuneResult::from_outcomes(outcomes))
}

pub fn check_tables(spec: &GridSpec, tables: &[Option<&EmbeddingTable>]) -> Result<()> {
    if tables.len() != spec.embeddings.len() {
        return Err(Error::LengthMismatch {
            expected: spec.embeddings.len(),
            found: tables.len(),
        });
    }
    Ok(())
}

/// One row of an ablation table.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    /// `None` for the all-features row.
    pub removed: Option<Family>,
    pub score: Result<RunScore>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    /// The all-features row first, then one row per enabled family in
    /// canonical family order.
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn baseline_f1(&self) -> Option<f64> {
        self.rows.first()?.score.as_ref().ok().map(RunScore::f1)
    }

    /// Row F1 minus the all-features F1; zero for the all-features row.
    pub fn delta_f1(&self, row: usize) -> Option<f64> {
        let base = self.baseline_f1()?;
        let f1 = self.rows.get(row)?.score.as_ref().ok()?.f1();
        Some(f1 - base)
    }
}

/// Configurations of an ablation: the full one, then each enabled family
/// switched off in turn.
pub fn ablation_configs(full: &FeatureConfig) -> Vec<(Option<Family>, FeatureConfig)> {
    let mut configs = alloc::vec![(None, *full)];
    for family in full.families.iter() {
        let mut config = *full;
        config.families.remove(family);
        configs.push((Some(family), config));
    }
    configs
}

pub fn run_ablation_row(
    experiment: &Experiment<'_>,
    removed: Option<Family>,
    features: &FeatureConfig,
    embeddings: Option<&EmbeddingTable>,
) -> AblationRow {
    let table = if features.uses_embeddings() { embeddings } else { None };
    AblationRow {
        removed,
        score: experiment.run(features, table, experiment.train_config),
    }
}

/// Sequential ablation study.
pub fn ablate(
    experiment: &Experiment<'_>,
    full: &FeatureConfig,
    embeddings: Option<&EmbeddingTable>,
) -> Result<AblationTable> {
    full.validate()?;
    let rows = ablation_configs(full)
        .into_iter()
        .map(|(removed, config)| run_ablation_row(experiment, removed, &config, embeddings))
        .collect();
    Ok(AblationTable { rows })
}
