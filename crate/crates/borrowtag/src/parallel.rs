//! Grid search and ablation spread over a thread pool.
//!
//! Each run is deterministic on its own and results are collected in
//! enumeration order, so the output does not depend on the number of jobs.

use borrowtag_core::tune::{
    ablation_configs, check_tables, run_ablation_row, run_point, AblationTable, Experiment, GridSpec,
    TuneResult,
};
use borrowtag_core::{EmbeddingTable, FeatureConfig};
use rayon::prelude::*;

use crate::errors::{Error, Result};

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))
}

pub fn grid_search(
    experiment: &Experiment<'_>,
    base: &FeatureConfig,
    spec: &GridSpec,
    tables: &[Option<&EmbeddingTable>],
    jobs: usize,
) -> Result<TuneResult> {
    spec.validate()?;
    check_tables(spec, tables)?;
    let points = spec.points();
    let outcomes = pool(jobs)?.install(|| {
        points
            .par_iter()
            .map(|&p| {
                let outcome = run_point(experiment, base, tables, p);
                log::info!("grid point {p:?} done");
                outcome
            })
            .collect()
    });
    Ok(TuneResult::from_outcomes(outcomes))
}

pub fn ablate(
    experiment: &Experiment<'_>,
    full: &FeatureConfig,
    embeddings: Option<&EmbeddingTable>,
    jobs: usize,
) -> Result<AblationTable> {
    full.validate()?;
    let configs = ablation_configs(full);
    let rows = pool(jobs)?.install(|| {
        configs
            .par_iter()
            .map(|(removed, config)| run_ablation_row(experiment, *removed, config, embeddings))
            .collect()
    });
    Ok(AblationTable { rows })
}
