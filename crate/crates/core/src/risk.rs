//! Nested Monte Carlo estimate of the minimized Bayes risk over a grid of
//! sample sizes.
//!
//! One outer replicate draws `(alpha^2, beta)` from the prior, simulates `n`
//! observations, samples the posterior of theta and scores the posterior
//! expected loss at the Bayes rule. Averaging `K` replicates estimates the
//! Bayes risk at `n`; adding `c n` gives the total cost.

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bs_model::{bs_sample, invgamma_sample, BsParams};
use crate::error::{Error, Result};
use crate::loss::{expected_posterior_loss, LossSpec};
use crate::posterior::{sample_joint, Dataset, McmcConfig, PriorSpec};
use crate::stream::StreamKey;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub prior: PriorSpec,
    pub loss: LossSpec,
    /// Per-observation sampling cost `c`.
    pub unit_cost: f64,
    pub grid: Vec<u32>,
    /// Outer Monte Carlo replicates `K` per risk estimate.
    pub outer_reps: usize,
    pub mcmc: McmcConfig,
    pub estimates_per_n: usize,
    pub seed: u64,
}

pub const DEFAULT_OUTER_REPS: usize = 100;
pub const DEFAULT_ESTIMATES_PER_N: usize = 10;

/// `2, 12, ..., 92`.
pub fn default_grid() -> Vec<u32> {
    (2..=92).step_by(10).collect()
}

impl ExperimentConfig {
    /// Default budget around a given prior, loss and unit cost.
    pub fn new(prior: PriorSpec, loss: LossSpec, unit_cost: f64) -> Self {
        Self {
            prior,
            loss,
            unit_cost,
            grid: default_grid(),
            outer_reps: DEFAULT_OUTER_REPS,
            mcmc: McmcConfig::default(),
            estimates_per_n: DEFAULT_ESTIMATES_PER_N,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.unit_cost > 0.0) || !self.unit_cost.is_finite() {
            return Err(Error::config("cost", "must be finite and > 0"));
        }
        if self.grid.is_empty() {
            return Err(Error::config("grid", "must contain at least one n"));
        }
        if self.grid.contains(&0) {
            return Err(Error::config("grid", "every n must be >= 1"));
        }
        let mut sorted = self.grid.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("grid", "values must be distinct"));
        }
        if self.outer_reps < 1 {
            return Err(Error::config("K", "must be >= 1"));
        }
        if self.estimates_per_n < 1 {
            return Err(Error::config("estimates_per_n", "must be >= 1"));
        }
        self.mcmc.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    pub n: u32,
    /// Index of this estimate among the `estimates_per_n` at the same `n`.
    pub replicate: usize,
    pub risk_estimate: f64,
    pub total_cost: f64,
    /// Outer replicates that contributed after dropping failed chains.
    pub effective_k: usize,
    pub mean_acceptance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub risk: f64,
    pub effective_k: usize,
    pub mean_acceptance: f64,
}

/// Posterior expected loss and MH acceptance from one outer replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateLoss {
    pub loss: f64,
    pub acceptance_rate: f64,
}

/// Simulates `n` observations from a prior draw of the BS parameters.
pub fn simulate_dataset<R: Rng + ?Sized>(
    n: u32,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<(BsParams, Dataset)> {
    let alpha2 = invgamma_sample(&prior.alpha2, rng);
    let beta = invgamma_sample(&prior.beta, rng);
    let params = BsParams::new(alpha2.sqrt(), beta)?;
    let xs = (0..n).map(|_| bs_sample(&params, rng)).collect();
    Ok((params, Dataset::new(xs)?))
}

/// One outer replicate: prior draw, data, posterior, expected loss.
pub fn outer_replicate<R: Rng + ?Sized>(
    n: u32,
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<ReplicateLoss> {
    let (_, data) = simulate_dataset(n, &cfg.prior, rng)?;
    let draws = sample_joint(&data, &cfg.prior, &cfg.mcmc, rng)?;
    let loss = expected_posterior_loss(&draws.theta, &cfg.loss)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("posterior expected loss {loss}")));
    }
    Ok(ReplicateLoss {
        loss,
        acceptance_rate: draws.acceptance_rate,
    })
}

/// Averages `cfg.outer_reps` replicates, each on the substream
/// `(cfg.seed, n, replicate, k)`. A failed replicate is retried once on a
/// second stream of the same key and then dropped.
pub fn estimate_bayes_risk(n: u32, replicate: usize, cfg: &ExperimentConfig) -> Result<RiskEstimate> {
    if n == 0 {
        return Err(Error::Domain("sample size must be >= 1".into()));
    }
    let mut sum = 0.0;
    let mut acc = 0.0;
    let mut used = 0usize;
    let mut last_err = None;
    for k in 0..cfg.outer_reps {
        let key = StreamKey {
            seed: cfg.seed,
            n: n as u64,
            replicate: replicate as u64,
            outer: k as u64,
        };
        let outcome = outer_replicate(n, cfg, &mut key.rng(0)).or_else(|first| {
            warn!("n = {n}, estimate {replicate}, outer {k}: {first}; retrying");
            outer_replicate(n, cfg, &mut key.rng(1))
        });
        match outcome {
            Ok(r) => {
                sum += r.loss;
                acc += r.acceptance_rate;
                used += 1;
            }
            Err(e) => {
                warn!("n = {n}, estimate {replicate}, outer {k}: dropped after retry: {e}");
                last_err = Some(e);
            }
        }
    }
    if used == 0 {
        return Err(last_err.unwrap_or_else(|| Error::Domain("no outer replicates".into())));
    }
    Ok(RiskEstimate {
        risk: sum / used as f64,
        effective_k: used,
        mean_acceptance: acc / used as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Progress {
    PointStarted { n: u32, replicate: usize },
    PointFinished { n: u32, replicate: usize, risk: f64, effective_k: usize },
    PointFailed { n: u32, replicate: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub n: u32,
    pub replicate: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRun {
    /// Ordered by grid position, then estimate index.
    pub points: Vec<RiskPoint>,
    pub failures: Vec<PointFailure>,
}

pub fn run_grid(cfg: &ExperimentConfig) -> Result<GridRun> {
    run_grid_with_progress(cfg, &|_| {})
}

/// Runs every `(n, estimate)` cell in parallel. Cells that fail are reported
/// in `failures`; the run fails only if some `n` has no successful estimate.
pub fn run_grid_with_progress(
    cfg: &ExperimentConfig,
    progress: &(dyn Fn(&Progress) + Sync),
) -> Result<GridRun> {
    cfg.validate()?;
    let cells: Vec<(u32, usize)> = cfg
        .grid
        .iter()
        .flat_map(|&n| (0..cfg.estimates_per_n).map(move |r| (n, r)))
        .collect();

    let outcomes: Vec<std::result::Result<RiskPoint, PointFailure>> = cells
        .par_iter()
        .map(|&(n, replicate)| {
            progress(&Progress::PointStarted { n, replicate });
            match estimate_bayes_risk(n, replicate, cfg) {
                Ok(est) => {
                    progress(&Progress::PointFinished {
                        n,
                        replicate,
                        risk: est.risk,
                        effective_k: est.effective_k,
                    });
                    Ok(RiskPoint {
                        n,
                        replicate,
                        risk_estimate: est.risk,
                        total_cost: est.risk + cfg.unit_cost * n as f64,
                        effective_k: est.effective_k,
                        mean_acceptance: est.mean_acceptance,
                    })
                }
                Err(e) => {
                    let message = e.to_string();
                    progress(&Progress::PointFailed {
                        n,
                        replicate,
                        message: message.clone(),
                    });
                    Err(PointFailure { n, replicate, message })
                }
            }
        })
        .collect();

    let mut points = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(p) => points.push(p),
            Err(f) => failures.push(f),
        }
    }
    for &n in &cfg.grid {
        if !points.iter().any(|p| p.n == n) {
            let message = failures
                .iter()
                .find(|f| f.n == n)
                .map(|f| f.message.clone())
                .unwrap_or_default();
            return Err(Error::GridPoint { n, message });
        }
    }
    Ok(GridRun { points, failures })
}
