//! End-to-end run: grid of risk estimates, curve fit and optimal size for
//! each independent replicate, then consensus.

use chrono::{SecondsFormat, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::risk::{run_grid_with_progress, PointFailure, Progress, RiskPoint};
use crate::sizing::{consensus, fit_cost_curve, optimal_n, SsdResult};
use crate::stream::derive_seed;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRun {
    /// 1-based.
    pub index: usize,
    /// Master seed of this replicate's grid.
    pub seed: u64,
    pub points: Vec<RiskPoint>,
    pub failures: Vec<PointFailure>,
    pub result: SsdResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub replicates: Vec<ReplicateRun>,
    pub consensus: SsdResult,
}

impl RunManifest {
    /// Copy with timestamps blanked, for comparing runs.
    pub fn without_timestamps(&self) -> Self {
        Self {
            started: String::new(),
            finished: String::new(),
            ..self.clone()
        }
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn run(config: &RunConfig) -> Result<RunManifest> {
    run_with_progress(config, &|_, _| {})
}

/// Progress callbacks receive the 1-based replicate index.
pub fn run_with_progress(
    config: &RunConfig,
    progress: &(dyn Fn(usize, &Progress) + Sync),
) -> Result<RunManifest> {
    config.experiment.validate()?;
    if config.replicates < 1 {
        return Err(Error::config("replicates", "must be >= 1"));
    }
    let started = now();
    let replicates = (1..=config.replicates)
        .into_par_iter()
        .map(|index| {
            run_replicate(config, index, progress).map_err(|e| Error::Replicate {
                replicate: index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<SsdResult> = replicates.iter().map(|r| r.result).collect();
    let consensus = consensus(&results)?;
    Ok(RunManifest {
        config: config.clone(),
        tool_version: TOOL_VERSION.to_string(),
        started,
        finished: now(),
        replicates,
        consensus,
    })
}

fn run_replicate(
    config: &RunConfig,
    index: usize,
    progress: &(dyn Fn(usize, &Progress) + Sync),
) -> Result<ReplicateRun> {
    let mut experiment = config.experiment.clone();
    experiment.seed = derive_seed(config.experiment.seed, index as u64);
    let grid = run_grid_with_progress(&experiment, &|e| progress(index, e))?;
    let curve = fit_cost_curve(&grid.points, experiment.unit_cost)?;
    Ok(ReplicateRun {
        index,
        seed: experiment.seed,
        points: grid.points,
        failures: grid.failures,
        result: optimal_n(&curve),
    })
}
