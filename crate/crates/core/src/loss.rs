//! The four decision losses for estimating the BS mean.
//!
//! Each loss has a Bayes rule (the posterior-optimal decision) and a
//! plug-in estimator of the posterior expected loss at that rule, both
//! computed from a sample of posterior draws of theta.
//!
//! | kind               | decision          | Bayes rule                              |
//! |--------------------|-------------------|-----------------------------------------|
//! | `Absolute`         | point `d`         | median                                  |
//! | `Quadratic`        | point `d`         | mean                                    |
//! | `IntervalQuantile` | interval `[a, b]` | `rho/2` and `1 - rho/2` quantiles       |
//! | `IntervalCentered` | interval `[a, b]` | `mean -/+ sd / sqrt(gamma)`             |
//!
//! Quantiles are order statistics: the `p`-quantile of `N` sorted draws is
//! the `ceil(pN)`-th one (1-based, at least the first), no interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", try_from = "RawLossSpec")]
pub enum LossSpec {
    /// `|theta - d|`
    Absolute,
    /// `(theta - d)^2`
    Quadratic,
    /// `rho * tau + (a - theta)^+ + (theta - b)^+`, `tau = (b - a) / 2`
    IntervalQuantile { rho: f64 },
    /// `gamma * tau + (theta - m)^2 / tau`, `m = (a + b) / 2`
    IntervalCentered { gamma: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind")]
enum RawLossSpec {
    Absolute,
    Quadratic,
    IntervalQuantile { rho: f64 },
    IntervalCentered { gamma: f64 },
}

impl TryFrom<RawLossSpec> for LossSpec {
    type Error = Error;
    fn try_from(raw: RawLossSpec) -> Result<Self> {
        match raw {
            RawLossSpec::Absolute => Ok(LossSpec::Absolute),
            RawLossSpec::Quadratic => Ok(LossSpec::Quadratic),
            RawLossSpec::IntervalQuantile { rho } => LossSpec::interval_quantile(rho),
            RawLossSpec::IntervalCentered { gamma } => LossSpec::interval_centered(gamma),
        }
    }
}

impl LossSpec {
    pub fn interval_quantile(rho: f64) -> Result<Self> {
        if rho > 0.0 && rho < 1.0 {
            Ok(LossSpec::IntervalQuantile { rho })
        } else {
            Err(Error::InvalidParameter {
                name: "rho",
                value: rho,
                reason: "must lie in (0, 1)",
            })
        }
    }

    pub fn interval_centered(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(LossSpec::IntervalCentered { gamma })
        } else {
            Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "must be finite and > 0",
            })
        }
    }

    /// Short label used in configs and reports: `L1` .. `L4`.
    pub fn label(&self) -> &'static str {
        match self {
            LossSpec::Absolute => "L1",
            LossSpec::Quadratic => "L2",
            LossSpec::IntervalQuantile { .. } => "L3",
            LossSpec::IntervalCentered { .. } => "L4",
        }
    }

    pub fn is_interval(&self) -> bool {
        matches!(
            self,
            LossSpec::IntervalQuantile { .. } | LossSpec::IntervalCentered { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decision {
    Point(f64),
    Interval { lower: f64, upper: f64 },
}

impl Decision {
    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        if lower <= upper {
            Ok(Decision::Interval { lower, upper })
        } else {
            Err(Error::Domain(format!(
                "interval lower bound {lower} exceeds upper bound {upper}"
            )))
        }
    }
}

/// Index (0-based) of the `p`-quantile order statistic among `n` sorted values.
///
/// `p * n` within a relative 1e-9 of an integer is treated as that integer, so
/// `0.95 * 100` selects the 95th value despite binary rounding.
pub fn quantile_index(p: f64, n: usize) -> usize {
    debug_assert!(n > 0);
    let x = p * n as f64;
    let nearest = x.round();
    let rank = if (x - nearest).abs() <= 1e-9 * (n as f64).max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (rank.max(1.0) as usize).min(n) - 1
}

/// Order-statistic quantile of already sorted values.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    sorted[quantile_index(p, sorted.len())]
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn mean(draws: &[f64]) -> f64 {
    draws.iter().sum::<f64>() / draws.len() as f64
}

fn sum_sq_dev(draws: &[f64], m: f64) -> f64 {
    draws.iter().map(|t| (t - m) * (t - m)).sum()
}

/// Sample variance with divisor `N - 1`.
pub fn sample_variance(draws: &[f64]) -> f64 {
    let m = mean(draws);
    sum_sq_dev(draws, m) / (draws.len() - 1) as f64
}

/// Standard deviation with divisor `N`: the moment of the draw set itself.
fn population_sd(draws: &[f64], m: f64) -> f64 {
    (sum_sq_dev(draws, m) / draws.len() as f64).sqrt()
}

fn check_draws(draws: &[f64]) -> Result<()> {
    if draws.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 posterior draws, got {}",
            draws.len()
        )));
    }
    if let Some(bad) = draws.iter().find(|t| !t.is_finite()) {
        return Err(Error::NonFinite(format!("posterior draw {bad}")));
    }
    Ok(())
}

fn sorted_copy(draws: &[f64]) -> Vec<f64> {
    let mut v = draws.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

fn quantile_interval(sorted: &[f64], rho: f64) -> (f64, f64) {
    (
        empirical_quantile(sorted, 0.5 * rho),
        empirical_quantile(sorted, 1.0 - 0.5 * rho),
    )
}

pub fn bayes_rule(theta_draws: &[f64], spec: &LossSpec) -> Result<Decision> {
    check_draws(theta_draws)?;
    Ok(match *spec {
        LossSpec::Absolute => Decision::Point(median_sorted(&sorted_copy(theta_draws))),
        LossSpec::Quadratic => Decision::Point(mean(theta_draws)),
        LossSpec::IntervalQuantile { rho } => {
            let (lower, upper) = quantile_interval(&sorted_copy(theta_draws), rho);
            Decision::Interval { lower, upper }
        }
        LossSpec::IntervalCentered { gamma } => {
            let m = mean(theta_draws);
            let half = population_sd(theta_draws, m) / gamma.sqrt();
            Decision::Interval {
                lower: m - half,
                upper: m + half,
            }
        }
    })
}

/// Plug-in estimate of the posterior expected loss at the Bayes rule.
pub fn expected_posterior_loss(theta_draws: &[f64], spec: &LossSpec) -> Result<f64> {
    check_draws(theta_draws)?;
    let n = theta_draws.len() as f64;
    Ok(match *spec {
        LossSpec::Absolute => {
            let d = median_sorted(&sorted_copy(theta_draws));
            theta_draws.iter().map(|t| (t - d).abs()).sum::<f64>() / n
        }
        LossSpec::Quadratic => sample_variance(theta_draws),
        LossSpec::IntervalQuantile { rho } => {
            let sorted = sorted_copy(theta_draws);
            let (a, b) = quantile_interval(&sorted, rho);
            let upper: f64 = sorted.iter().rev().take_while(|&&t| t >= b).sum();
            let lower: f64 = sorted.iter().take_while(|&&t| t <= a).sum();
            (upper - lower) / n
        }
        LossSpec::IntervalCentered { gamma } => {
            let m = mean(theta_draws);
            2.0 * gamma.sqrt() * population_sd(theta_draws, m)
        }
    })
}

/// Raw loss of `decision` when the true mean is `theta`.
pub fn loss_value(theta: f64, decision: &Decision, spec: &LossSpec) -> Result<f64> {
    match (*spec, *decision) {
        (LossSpec::Absolute, Decision::Point(d)) => Ok((theta - d).abs()),
        (LossSpec::Quadratic, Decision::Point(d)) => Ok((theta - d) * (theta - d)),
        (LossSpec::IntervalQuantile { rho }, Decision::Interval { lower, upper }) => {
            let tau = 0.5 * (upper - lower);
            Ok(rho * tau + (lower - theta).max(0.0) + (theta - upper).max(0.0))
        }
        (LossSpec::IntervalCentered { gamma }, Decision::Interval { lower, upper }) => {
            let tau = 0.5 * (upper - lower);
            let m = 0.5 * (lower + upper);
            if tau > 0.0 {
                Ok(gamma * tau + (theta - m) * (theta - m) / tau)
            } else if theta == m {
                Ok(0.0)
            } else {
                Err(Error::Domain(format!(
                    "degenerate interval [{lower}, {upper}] with theta = {theta}"
                )))
            }
        }
        (spec, decision) => Err(Error::Domain(format!(
            "decision {decision:?} does not match loss {}",
            spec.label()
        ))),
    }
}
