//! Joint posterior of `(alpha^2, beta)` under independent inverse-gamma priors.
//!
//! `beta` is drawn from its marginal posterior with a random-walk
//! Metropolis-Hastings chain on `log beta`; each kept `beta` is then paired
//! with an exact draw of `alpha^2` from its inverse-gamma full conditional.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bs_model::{invgamma_sample, mean_from_alpha2, InvGammaParams};
use crate::error::{Error, Result};

/// Hyperparameters: `beta ~ IG(a1, b1)` and `alpha^2 ~ IG(a2, b2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub beta: InvGammaParams,
    pub alpha2: InvGammaParams,
}

impl PriorSpec {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        Ok(Self {
            beta: InvGammaParams::new(a1, b1)?,
            alpha2: InvGammaParams::new(a2, b2)?,
        })
    }

    /// The same inverse gamma on both parameters.
    pub fn symmetric(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, a, b)
    }
}

/// Observed sample with the sufficient sums the posterior needs.
#[derive(Debug, Clone)]
pub struct Dataset {
    values: Vec<f64>,
    sum_x: f64,
    sum_inv_x: f64,
    sum_log_x: f64,
}

impl Dataset {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("dataset needs at least one value".into()));
        }
        Self::build(values)
    }

    /// A dataset with no observations. The posterior then reduces to the
    /// prior; only useful for checking `log_beta_posterior`.
    pub fn empty() -> Self {
        Self {
            values: Vec::new(),
            sum_x: 0.0,
            sum_inv_x: 0.0,
            sum_log_x: 0.0,
        }
    }

    fn build(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain(format!("observations must be > 0, got {bad}")));
        }
        Ok(Self {
            sum_x: values.iter().sum(),
            sum_inv_x: values.iter().map(|x| x.recip()).sum(),
            sum_log_x: values.iter().map(|x| x.ln()).sum(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn median(&self) -> Option<f64> {
        if self.values.is_empty() {
            return None;
        }
        let mut v = self.values.clone();
        v.sort_unstable_by(f64::total_cmp);
        let n = v.len();
        Some(if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        })
    }

    /// `sum_i (x_i / beta + beta / x_i - 2)`, clamped at zero against rounding.
    fn discrepancy(&self, beta: f64) -> f64 {
        let n = self.values.len() as f64;
        (self.sum_x / beta + beta * self.sum_inv_x - 2.0 * n).max(0.0)
    }
}

/// Inverse-gamma full conditional of `alpha^2` given `beta`:
/// shape `(n + 1)/2 + a2`, scale `discrepancy(beta)/2 + b2`.
pub fn alpha2_conditional(beta: f64, data: &Dataset, prior: &PriorSpec) -> Result<InvGammaParams> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be > 0, got {beta}")));
    }
    if data.is_empty() {
        return Err(Error::Domain("conditional of alpha^2 needs n >= 1".into()));
    }
    let n = data.len() as f64;
    InvGammaParams::new(
        0.5 * (n + 1.0) + prior.alpha2.shape(),
        0.5 * data.discrepancy(beta) + prior.alpha2.scale(),
    )
}

pub fn sample_alpha2_given_beta<R: Rng + ?Sized>(
    beta: f64,
    data: &Dataset,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<f64> {
    let params = alpha2_conditional(beta, data, prior)?;
    Ok(invgamma_sample(&params, rng))
}

/// Unnormalized log marginal posterior of `beta` (with `alpha^2` integrated out).
pub fn log_beta_posterior(beta: f64, data: &Dataset, prior: &PriorSpec) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be > 0, got {beta}")));
    }
    Ok(log_beta_kernel(beta, data, prior))
}

fn log_beta_kernel(beta: f64, data: &Dataset, prior: &PriorSpec) -> f64 {
    let n = data.len() as f64;
    let (a1, b1) = (prior.beta.shape(), prior.beta.scale());
    let (a2, b2) = (prior.alpha2.shape(), prior.alpha2.scale());
    let ln_beta = beta.ln();

    // log[(beta/x)^{1/2} + (beta/x)^{3/2}] = log(beta/x)/2 + log1p(beta/x)
    let half_log_ratio = 0.5 * (n * ln_beta - data.sum_log_x);
    let log1p_sum: f64 = data.values.iter().map(|x| (beta / x).ln_1p()).sum();

    -(n + a1 + 1.0) * ln_beta - b1 / beta + half_log_ratio + log1p_sum
        - (0.5 * (n + 1.0) + a2) * (0.5 * data.discrepancy(beta) + b2).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub burn_in: usize,
    pub thin: usize,
    pub keep: usize,
    /// Standard deviation of the Gaussian random walk on `log beta`.
    pub initial_step: f64,
    pub adapt_during_burn_in: bool,
    pub target_acceptance: (f64, f64),
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            burn_in: 500,
            thin: 20,
            keep: 500,
            initial_step: 0.5,
            adapt_during_burn_in: true,
            target_acceptance: (0.4, 0.8),
        }
    }
}

/// Burn-in iterations per step-size adjustment.
pub const ADAPT_BATCH: usize = 50;
const ADAPT_FACTOR: f64 = 1.1;

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin < 1 {
            return Err(Error::config("thin", "must be >= 1"));
        }
        if self.keep < 2 {
            return Err(Error::config("keep", "must be >= 2"));
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return Err(Error::config("initial_step", "must be finite and > 0"));
        }
        let (lo, hi) = self.target_acceptance;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::config(
                "target_acceptance",
                format!("need 0 < low < high < 1, got ({lo}, {hi})"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub theta: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub beta: Vec<f64>,
    /// Fraction of accepted proposals after burn-in.
    pub acceptance_rate: f64,
    pub lag1_autocorrelation_beta: f64,
    /// Random-walk scale in effect after burn-in.
    pub final_step: f64,
}

pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    let denom: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    if denom == 0.0 {
        return 1.0;
    }
    let num: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    (num / denom).clamp(-1.0, 1.0)
}

/// Random-walk state on `eta = log beta`.
struct Chain<'a> {
    data: &'a Dataset,
    prior: &'a PriorSpec,
    eta: f64,
    log_target: f64,
}

impl<'a> Chain<'a> {
    fn new(data: &'a Dataset, prior: &'a PriorSpec, beta0: f64) -> Self {
        let eta = beta0.ln();
        let log_target = Self::target(data, prior, eta);
        Self {
            data,
            prior,
            eta,
            log_target,
        }
    }

    // Density of eta carries the Jacobian d beta / d eta = beta.
    fn target(data: &Dataset, prior: &PriorSpec, eta: f64) -> f64 {
        let lp = log_beta_kernel(eta.exp(), data, prior) + eta;
        if lp.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, scale: f64, rng: &mut R) -> bool {
        let z: f64 = StandardNormal.sample(rng);
        let proposal = self.eta + scale * z;
        let lp = Self::target(self.data, self.prior, proposal);
        let u: f64 = rng.random();
        if lp > f64::NEG_INFINITY && u.ln() < lp - self.log_target {
            self.eta = proposal;
            self.log_target = lp;
            true
        } else {
            false
        }
    }
}

/// Draws `cfg.keep` joint posterior samples of `(alpha^2, beta, theta)`.
pub fn sample_joint<R: Rng + ?Sized>(
    data: &Dataset,
    prior: &PriorSpec,
    cfg: &McmcConfig,
    rng: &mut R,
) -> Result<PosteriorDraws> {
    cfg.validate()?;
    let beta0 = data
        .median()
        .ok_or_else(|| Error::Domain("posterior sampling needs n >= 1".into()))?;
    let mut chain = Chain::new(data, prior, beta0);
    if !chain.log_target.is_finite() {
        return Err(Error::NonFinite(format!(
            "log posterior at the starting point beta = {beta0}"
        )));
    }

    let mut scale = cfg.initial_step;
    let (low, high) = cfg.target_acceptance;
    let mut batch_accepts = 0usize;
    for i in 0..cfg.burn_in {
        batch_accepts += chain.step(scale, rng) as usize;
        if cfg.adapt_during_burn_in && (i + 1) % ADAPT_BATCH == 0 {
            let rate = batch_accepts as f64 / ADAPT_BATCH as f64;
            if rate < low {
                scale /= ADAPT_FACTOR;
            } else if rate > high {
                scale *= ADAPT_FACTOR;
            }
            batch_accepts = 0;
        }
    }

    let total = cfg.thin * cfg.keep;
    let mut accepts = 0usize;
    let mut beta = Vec::with_capacity(cfg.keep);
    for i in 0..total {
        accepts += chain.step(scale, rng) as usize;
        if (i + 1) % cfg.thin == 0 {
            beta.push(chain.eta.exp());
        }
    }
    let acceptance_rate = accepts as f64 / total as f64;
    if accepts == 0 || accepts == total {
        return Err(Error::DegenerateChain(format!(
            "acceptance rate {acceptance_rate} over {total} proposals"
        )));
    }

    let mut alpha2 = Vec::with_capacity(cfg.keep);
    let mut theta = Vec::with_capacity(cfg.keep);
    for &b in &beta {
        let a2 = sample_alpha2_given_beta(b, data, prior, rng)?;
        let t = mean_from_alpha2(a2, b);
        if !(b.is_finite() && a2.is_finite() && t.is_finite()) || b <= 0.0 || a2 <= 0.0 {
            return Err(Error::NonFinite(format!(
                "posterior draw beta = {b}, alpha^2 = {a2}"
            )));
        }
        alpha2.push(a2);
        theta.push(t);
    }

    Ok(PosteriorDraws {
        lag1_autocorrelation_beta: lag1_autocorrelation(&beta),
        theta,
        alpha2,
        beta,
        acceptance_rate,
        final_step: scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bs_model::invgamma_log_pdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn prior10() -> PriorSpec {
        PriorSpec::symmetric(10.0, 50.0).unwrap()
    }

    #[test]
    fn empty_data_reduces_to_prior_kernel() {
        let prior = prior10();
        let data = Dataset::empty();
        let diff = |b: f64| {
            log_beta_posterior(b, &data, &prior).unwrap()
                - invgamma_log_pdf(b, &prior.beta).unwrap()
        };
        let c = diff(1.0);
        for b in [0.1, 0.5, 2.0, 7.5, 40.0] {
            assert!((diff(b) - c).abs() < 1e-10, "beta = {b}");
        }
    }

    #[test]
    fn rejects_nonpositive_beta() {
        let data = Dataset::new(vec![1.0, 2.0]).unwrap();
        assert!(log_beta_posterior(0.0, &data, &prior10()).is_err());
        assert!(log_beta_posterior(-1.0, &data, &prior10()).is_err());
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![]).is_err());
        assert!(Dataset::new(vec![1.0, 0.0]).is_err());
        assert!(Dataset::new(vec![1.0, f64::INFINITY]).is_err());
        assert_eq!(Dataset::new(vec![3.0, 1.0, 2.0, 10.0]).unwrap().median(), Some(2.5));
    }

    #[test]
    fn conditional_parameters() {
        let prior = prior10();
        let data = Dataset::new(vec![1.3]).unwrap();
        let p = alpha2_conditional(0.7, &data, &prior).unwrap();
        assert_eq!(p.shape(), 11.0);

        let data = Dataset::new(vec![2.5, 2.5, 2.5]).unwrap();
        let p = alpha2_conditional(2.5, &data, &prior).unwrap();
        assert_eq!(p.scale(), 50.0);
        assert_eq!(p.shape(), 12.0);
    }

    #[test]
    fn sample_joint_contract() {
        let data = Dataset::new(vec![1.0, 2.0, 3.0]).unwrap();
        let cfg = McmcConfig {
            keep: 200,
            ..McmcConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = sample_joint(&data, &prior10(), &cfg, &mut rng).unwrap();
        assert_eq!(d.theta.len(), 200);
        assert_eq!(d.alpha2.len(), 200);
        assert_eq!(d.beta.len(), 200);
        for j in 0..200 {
            assert!(d.theta[j] > 0.0 && d.alpha2[j] > 0.0 && d.beta[j] > 0.0);
            assert_eq!(d.theta[j] - d.beta[j] * (1.0 + d.alpha2[j] / 2.0), 0.0);
        }
        assert!((0.4..=0.8).contains(&d.acceptance_rate), "{}", d.acceptance_rate);
    }

    #[test]
    fn sample_joint_rejects_empty_and_bad_config() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = McmcConfig::default();
        assert!(sample_joint(&Dataset::empty(), &prior10(), &cfg, &mut rng).is_err());
        let data = Dataset::new(vec![1.0]).unwrap();
        let bad = McmcConfig { keep: 1, ..cfg };
        assert!(sample_joint(&data, &prior10(), &bad, &mut rng).is_err());
        let bad = McmcConfig { thin: 0, ..cfg };
        assert!(sample_joint(&data, &prior10(), &bad, &mut rng).is_err());
    }

    #[test]
    fn sample_joint_deterministic() {
        let data = Dataset::new(vec![0.4, 1.9, 2.2, 5.0]).unwrap();
        let cfg = McmcConfig {
            keep: 50,
            ..McmcConfig::default()
        };
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            sample_joint(&data, &prior10(), &cfg, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn autocorrelation_edge_cases() {
        assert_eq!(lag1_autocorrelation(&[1.0]), 0.0);
        assert_eq!(lag1_autocorrelation(&[2.0, 2.0, 2.0]), 1.0);
        assert!(lag1_autocorrelation(&[1.0, -1.0, 1.0, -1.0]) < -0.5);
    }
}
