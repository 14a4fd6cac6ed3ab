//! Parallel execution of experiment grids.
//!
//! Every (generator, experiment, run) cell is independent; cells are mapped
//! on a rayon pool and folded with [`harness::aggregate`], which sorts by run
//! index, so results match the sequential core implementation exactly.

use cipherchain_core::harness::{self, ExperimentReport, HarnessConfig, RunOutcome};
use cipherchain_core::{BigramModel, NormalizedText, PrngKind};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Shape of an experiment grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub kinds: Vec<PrngKind>,
    pub experiments: u32,
    pub runs: u64,
    pub master_seed: u64,
}

/// Seed used for one run.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SeedRecord {
    pub prng: String,
    pub en: u32,
    pub run: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub reports: Vec<ExperimentReport>,
    pub seeds: Vec<SeedRecord>,
}

/// Runs the grid on at most `jobs` threads (`0` lets rayon decide).
pub fn run_grid(
    plaintext: &NormalizedText,
    model: &BigramModel,
    cfg: &HarnessConfig,
    grid: &Grid,
    jobs: usize,
) -> Result<GridResult> {
    cfg.validate()?;
    if grid.runs == 0 {
        return Err(cipherchain_core::Error::ZeroRuns.into());
    }
    if grid.experiments == 0 {
        return Err(CliError::Config("experiments must be at least 1".into()));
    }
    let mut cells = Vec::new();
    for &kind in &grid.kinds {
        for en in 1..=grid.experiments {
            let exp_seed = harness::experiment_seed(grid.master_seed, en);
            for run in 0..grid.runs {
                cells.push((kind, en, exp_seed, run, harness::run_seed(exp_seed, run)));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let outcomes: Vec<RunOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(kind, _, _, run, seed)| harness::run_once(plaintext, model, cfg, kind, run, seed))
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;

    let per_experiment = grid.runs as usize;
    let mut reports = Vec::with_capacity(grid.kinds.len());
    for (k, &kind) in grid.kinds.iter().enumerate() {
        let mut rows = Vec::with_capacity(grid.experiments as usize);
        for e in 0..grid.experiments as usize {
            let start = (k * grid.experiments as usize + e) * per_experiment;
            let (_, en, exp_seed, _, _) = cells[start];
            rows.push(harness::aggregate(
                en,
                exp_seed,
                &outcomes[start..start + per_experiment],
            )?);
        }
        reports.push(ExperimentReport {
            prng: kind,
            master_seed: grid.master_seed,
            config: cfg.clone(),
            rows,
        });
    }
    let seeds = cells
        .iter()
        .map(|&(kind, en, _, run, seed)| SeedRecord {
            prng: kind.name().to_string(),
            en,
            run,
            seed,
        })
        .collect();
    Ok(GridResult { reports, seeds })
}
