//! Cost-curve fit and the optimal sample size.
//!
//! The total cost is modelled as `tc(n) = E / (1 + n)^G + c n`. Taking logs of
//! the risk part gives the straight line `log(tc - c n) = log E - G log(1 + n)`,
//! fitted by ordinary least squares. Setting the derivative of the fitted
//! curve to zero gives `n* = (E G / c)^(1 / (G + 1)) - 1`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::RiskPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedCurve {
    pub e_hat: f64,
    pub g_hat: f64,
    pub c: f64,
    pub points_used: usize,
    pub points_dropped: usize,
    pub r_squared: f64,
}

impl FittedCurve {
    /// Fitted total cost at (possibly fractional) `n`.
    pub fn total_cost(&self, n: f64) -> f64 {
        self.e_hat / (1.0 + n).powf(self.g_hat) + self.c * n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Optimal { n: u64 },
    /// Sampling cost outweighs the achievable drop in risk.
    NotWorthwhile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsdResult {
    pub outcome: Outcome,
    pub curve: FittedCurve,
    /// `(E G / c)^(1/(G+1)) - 1` before rounding; `None` when undefined.
    pub raw_value: Option<f64>,
}

impl SsdResult {
    pub fn optimal_n(&self) -> Option<u64> {
        match self.outcome {
            Outcome::Optimal { n } => Some(n),
            Outcome::NotWorthwhile => None,
        }
    }
}

/// Least-squares fit of the linearized cost curve. Points whose risk part
/// `total_cost - c n` is not positive cannot be log-transformed and are
/// dropped.
pub fn fit_cost_curve(points: &[RiskPoint], c: f64) -> Result<FittedCurve> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
            reason: "must be finite and > 0",
        });
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for p in points {
        let risk = p.total_cost - c * p.n as f64;
        if risk > 0.0 && risk.is_finite() {
            xs.push((1.0 + p.n as f64).ln());
            ys.push(risk.ln());
        }
    }
    let dropped = points.len() - xs.len();
    if dropped > 0 {
        warn!("cost-curve fit: dropped {dropped} point(s) with total cost <= c n");
    }
    if xs.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 usable points, have {}",
            xs.len()
        )));
    }

    let m = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / m;
    let y_bar = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - x_bar, y - y_bar);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Fit("all usable points share one n".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(FittedCurve {
        e_hat: intercept.exp(),
        g_hat: -slope,
        c,
        points_used: xs.len(),
        points_dropped: dropped,
        r_squared,
    })
}

/// Minimizer of the fitted curve, rounded half-up to an integer.
pub fn optimal_n(curve: &FittedCurve) -> SsdResult {
    let (e, g, c) = (curve.e_hat, curve.g_hat, curve.c);
    let v = (e * g / c).powf(1.0 / (g + 1.0)) - 1.0;
    let raw_value = v.is_finite().then_some(v);
    let outcome = match raw_value {
        Some(v) if g > 0.0 && v >= 0.5 => Outcome::Optimal {
            n: ((v + 0.5).floor() as u64).max(1),
        },
        _ => Outcome::NotWorthwhile,
    };
    SsdResult {
        outcome,
        curve: *curve,
        raw_value,
    }
}

/// Combines independent runs of the same configuration.
///
/// A strict majority of not-worthwhile results yields not-worthwhile;
/// otherwise the member holding the lower median of the reported optimal
/// sizes is returned.
pub fn consensus(results: &[SsdResult]) -> Result<SsdResult> {
    if results.is_empty() {
        return Err(Error::Domain("consensus of zero results".into()));
    }
    let worthwhile: Vec<&SsdResult> = results.iter().filter(|r| r.optimal_n().is_some()).collect();
    let not_worth = results.len() - worthwhile.len();
    if 2 * not_worth > results.len() || worthwhile.is_empty() {
        return Ok(*results
            .iter()
            .find(|r| r.optimal_n().is_none())
            .expect("at least one not-worthwhile result"));
    }
    let mut sizes: Vec<u64> = worthwhile.iter().filter_map(|r| r.optimal_n()).collect();
    sizes.sort_unstable();
    let median = sizes[(sizes.len() - 1) / 2];
    Ok(**worthwhile
        .iter()
        .find(|r| r.optimal_n() == Some(median))
        .expect("median is a member"))
}
