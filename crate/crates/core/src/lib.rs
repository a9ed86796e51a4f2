//! Optimal Bayesian sample size for estimating the mean of the
//! Birnbaum-Saunders distribution.
//!
//! The pipeline: nested Monte Carlo estimates of the minimized Bayes risk on
//! a grid of sample sizes ([`risk`]), a power-law fit of the total-cost curve
//! and its minimizer ([`sizing`]), repeated over independent replicates and
//! combined by consensus ([`app`]).

pub mod app;
pub mod bs_model;
pub mod config;
pub mod error;
pub mod loss;
pub mod posterior;
pub mod report;
pub mod risk;
pub mod sizing;
pub mod stream;

pub use app::{run, run_with_progress, ReplicateRun, RunManifest};
pub use bs_model::{BsParams, InvGammaParams};
pub use config::{parse_config, RawConfig, RunConfig};
pub use error::{Error, Result};
pub use loss::{Decision, LossSpec};
pub use posterior::{Dataset, McmcConfig, PosteriorDraws, PriorSpec};
pub use risk::{ExperimentConfig, RiskPoint};
pub use sizing::{FittedCurve, Outcome, SsdResult};
