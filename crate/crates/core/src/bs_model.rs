//! Birnbaum-Saunders distribution and the inverse-gamma prior.
//!
//! Densities are exposed in log space only. Parameters are validated once, at
//! construction, so the sampling functions can sit in hot loops without
//! re-checking.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

/// Shape `alpha` and scale `beta` (the median) of a Birnbaum-Saunders law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBsParams")]
pub struct BsParams {
    alpha: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct RawBsParams {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawBsParams> for BsParams {
    type Error = Error;
    fn try_from(raw: RawBsParams) -> Result<Self> {
        BsParams::new(raw.alpha, raw.beta)
    }
}

impl BsParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Log density of BS(alpha, beta) at `x`.
pub fn bs_log_pdf(x: f64, p: &BsParams) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("BS density needs x > 0, got {x}")));
    }
    let (a, b) = (p.alpha, p.beta);
    let kernel = (x / b + b / x - 2.0) / (2.0 * a * a);
    Ok(-LN_SQRT_2PI - kernel + (x + b).ln()
        - (2.0 * a).ln()
        - 0.5 * b.ln()
        - 1.5 * x.ln())
}

/// Maps a standard-normal deviate to a BS(alpha, beta) variate.
///
/// `X = (beta/4) (alpha z + sqrt((alpha z)^2 + 4))^2`, evaluated as
/// `beta (w + sqrt(w^2 + 1))^2` with `w = alpha z / 2`. For negative `w` the
/// reciprocal form avoids cancellation.
pub fn bs_from_normal(z: f64, p: &BsParams) -> f64 {
    let w = 0.5 * p.alpha * z;
    let root = w.hypot(1.0);
    let u = if w >= 0.0 { w + root } else { 1.0 / (root - w) };
    p.beta * u * u
}

pub fn bs_sample<R: Rng + ?Sized>(p: &BsParams, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    bs_from_normal(z, p)
}

/// `theta = beta (1 + alpha^2 / 2)`.
pub fn bs_mean(p: &BsParams) -> f64 {
    mean_from_alpha2(p.alpha * p.alpha, p.beta)
}

/// The BS mean written in terms of `alpha^2`, the parameter the sampler works with.
#[inline]
pub fn mean_from_alpha2(alpha2: f64, beta: f64) -> f64 {
    beta * (1.0 + 0.5 * alpha2)
}

pub fn bs_variance(p: &BsParams) -> f64 {
    let a2 = p.alpha * p.alpha;
    let ab = p.alpha * p.beta;
    ab * ab * (1.0 + 1.25 * a2)
}

/// Inverse gamma with density proportional to `x^-(a+1) exp(-b/x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInvGamma")]
pub struct InvGammaParams {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawInvGamma {
    a: f64,
    b: f64,
}

impl TryFrom<RawInvGamma> for InvGammaParams {
    type Error = Error;
    fn try_from(raw: RawInvGamma) -> Result<Self> {
        InvGammaParams::new(raw.a, raw.b)
    }
}

impl InvGammaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        Ok(Self { a, b })
    }

    pub fn shape(&self) -> f64 {
        self.a
    }

    pub fn scale(&self) -> f64 {
        self.b
    }

    /// `b / (a - 1)`; infinite for `a <= 1`.
    pub fn mean(&self) -> f64 {
        if self.a > 1.0 {
            self.b / (self.a - 1.0)
        } else {
            f64::INFINITY
        }
    }

    /// `b^2 / ((a-1)^2 (a-2))`; infinite for `a <= 2`.
    pub fn variance(&self) -> f64 {
        if self.a > 2.0 {
            let d = self.a - 1.0;
            self.b * self.b / (d * d * (self.a - 2.0))
        } else {
            f64::INFINITY
        }
    }

    pub fn mode(&self) -> f64 {
        self.b / (self.a + 1.0)
    }
}

/// Draws `b / G` with `G ~ Gamma(a, 1)`, i.e. the reciprocal of a
/// Gamma(shape a, rate b) variate.
pub fn invgamma_sample<R: Rng + ?Sized>(p: &InvGammaParams, rng: &mut R) -> f64 {
    // Shape was validated at construction; Gamma::new only fails on a <= 0.
    let g = Gamma::new(p.a, 1.0).expect("validated shape").sample(rng);
    p.b / g
}

pub fn invgamma_log_pdf(x: f64, p: &InvGammaParams) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "inverse-gamma density needs x > 0, got {x}"
        )));
    }
    Ok(p.a * p.b.ln() - ln_gamma(p.a) - (p.a + 1.0) * x.ln() - p.b / x)
}
