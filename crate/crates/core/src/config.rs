//! Flat `key = value` run configuration.
//!
//! ```text
//! # optimal sample size, absolute loss
//! [prior]
//! a1 = 8
//! b1 = 50        # a2, b2 default to a1, b1
//! [loss]
//! loss = L1      # L1..L4; L3 takes rho, L4 takes gamma
//! [mcmc]
//! burn_in = 500
//! [run]
//! cost = 0.001
//! grid = 2:92:10 # start:stop:step or a comma list
//! ```
//!
//! Keys may also appear before any section header. A key under the wrong
//! section, an unknown key or a repeated key is an error.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::posterior::{McmcConfig, PriorSpec};
use crate::risk::{default_grid, ExperimentConfig, DEFAULT_ESTIMATES_PER_N, DEFAULT_OUTER_REPS};

pub const DEFAULT_REPLICATES: usize = 3;

/// Experiment plus the number of independent runs combined by consensus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub replicates: usize,
}

const KEYS: &[(&str, &str)] = &[
    ("prior", "a1"),
    ("prior", "b1"),
    ("prior", "a2"),
    ("prior", "b2"),
    ("loss", "loss"),
    ("loss", "rho"),
    ("loss", "gamma"),
    ("mcmc", "burn_in"),
    ("mcmc", "thin"),
    ("mcmc", "keep"),
    ("mcmc", "initial_step"),
    ("mcmc", "adapt"),
    ("mcmc", "accept_low"),
    ("mcmc", "accept_high"),
    ("run", "cost"),
    ("run", "grid"),
    ("run", "K"),
    ("run", "estimates_per_n"),
    ("run", "replicates"),
    ("run", "seed"),
];

fn section_of(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(_, k)| *k == key).map(|(s, _)| *s)
}

/// Unvalidated key/value pairs, from a file and/or command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(source: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (lineno, line) in source.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(Error::config(
                        format!("[{name}]"),
                        format!("unknown section on line {}", lineno + 1),
                    ));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(line, format!("line {} is not `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let home = section_of(key)
                .ok_or_else(|| Error::config(key, "unknown key"))?;
            if let Some(s) = &section {
                if s != home {
                    return Err(Error::config(key, format!("belongs in [{home}], found in [{s}]")));
                }
            }
            if raw.values.contains_key(key) {
                return Err(Error::config(key, "given more than once"));
            }
            raw.values.insert(key.to_string(), value.to_string());
        }
        Ok(raw)
    }

    /// Sets or overrides one key.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if section_of(key).is_none() {
            return Err(Error::config(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::config(key, format!("cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(key)?
            .ok_or_else(|| Error::config(key, "required but missing"))
    }

    fn positive(&self, key: &str, value: f64) -> Result<f64> {
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::config(key, format!("must be finite and > 0, got {value}")))
        }
    }

    pub fn build(&self) -> Result<RunConfig> {
        let loss_name: String = self.required("loss")?;
        let a1 = self.required::<f64>("a1").and_then(|v| self.positive("a1", v))?;
        let b1 = self.required::<f64>("b1").and_then(|v| self.positive("b1", v))?;
        let a2 = match self.parsed::<f64>("a2")? {
            Some(v) => self.positive("a2", v)?,
            None => a1,
        };
        let b2 = match self.parsed::<f64>("b2")? {
            Some(v) => self.positive("b2", v)?,
            None => b1,
        };
        let prior = PriorSpec::new(a1, b1, a2, b2)?;

        let rho: Option<f64> = self.parsed("rho")?;
        let gamma: Option<f64> = self.parsed("gamma")?;
        let loss = match loss_name.to_ascii_uppercase().as_str() {
            "L1" | "L2" => {
                if rho.is_some() {
                    return Err(Error::config("rho", format!("only applies to L3, loss is {loss_name}")));
                }
                if gamma.is_some() {
                    return Err(Error::config("gamma", format!("only applies to L4, loss is {loss_name}")));
                }
                if loss_name.eq_ignore_ascii_case("L1") {
                    LossSpec::Absolute
                } else {
                    LossSpec::Quadratic
                }
            }
            "L3" => {
                if gamma.is_some() {
                    return Err(Error::config("gamma", "only applies to L4, loss is L3"));
                }
                let rho = rho.ok_or_else(|| Error::config("rho", "required for L3"))?;
                LossSpec::interval_quantile(rho)
                    .map_err(|_| Error::config("rho", format!("must lie in (0, 1), got {rho}")))?
            }
            "L4" => {
                if rho.is_some() {
                    return Err(Error::config("rho", "only applies to L3, loss is L4"));
                }
                let gamma = gamma.ok_or_else(|| Error::config("gamma", "required for L4"))?;
                LossSpec::interval_centered(gamma)
                    .map_err(|_| Error::config("gamma", format!("must be finite and > 0, got {gamma}")))?
            }
            other => return Err(Error::config("loss", format!("expected L1..L4, got `{other}`"))),
        };

        let unit_cost = self.required::<f64>("cost").and_then(|v| self.positive("cost", v))?;
        let grid = match self.get("grid") {
            Some(text) => parse_grid(text)?,
            None => default_grid(),
        };
        let outer_reps = self.parsed::<usize>("K")?.unwrap_or(DEFAULT_OUTER_REPS);
        if outer_reps < 1 {
            return Err(Error::config("K", "must be >= 1"));
        }
        let estimates_per_n = self
            .parsed::<usize>("estimates_per_n")?
            .unwrap_or(DEFAULT_ESTIMATES_PER_N);
        if estimates_per_n < 1 {
            return Err(Error::config("estimates_per_n", "must be >= 1"));
        }
        let replicates = self.parsed::<usize>("replicates")?.unwrap_or(DEFAULT_REPLICATES);
        if replicates < 1 {
            return Err(Error::config("replicates", "must be >= 1"));
        }
        let seed = self.parsed::<u64>("seed")?.unwrap_or(0);

        let d = McmcConfig::default();
        let mcmc = McmcConfig {
            burn_in: self.parsed("burn_in")?.unwrap_or(d.burn_in),
            thin: self.parsed("thin")?.unwrap_or(d.thin),
            keep: self.parsed("keep")?.unwrap_or(d.keep),
            initial_step: self.parsed("initial_step")?.unwrap_or(d.initial_step),
            adapt_during_burn_in: self.parsed("adapt")?.unwrap_or(d.adapt_during_burn_in),
            target_acceptance: (
                self.parsed("accept_low")?.unwrap_or(d.target_acceptance.0),
                self.parsed("accept_high")?.unwrap_or(d.target_acceptance.1),
            ),
        };

        let experiment = ExperimentConfig {
            prior,
            loss,
            unit_cost,
            grid,
            outer_reps,
            mcmc,
            estimates_per_n,
            seed,
        };
        experiment.validate()?;
        Ok(RunConfig {
            experiment,
            replicates,
        })
    }
}

/// `start:stop:step` (stop included when reached) or `n1,n2,...`.
/// The result is sorted ascending; duplicates are rejected.
pub fn parse_grid(text: &str) -> Result<Vec<u32>> {
    let bad = |msg: String| Error::config("grid", msg);
    let mut grid: Vec<u32> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(bad(format!("expected start:stop:step, got `{text}`")));
        };
        let num = |s: &str| s.parse::<u32>().map_err(|e| bad(format!("`{s}`: {e}")));
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step == 0 || stop < start {
            return Err(bad(format!("empty or invalid range `{text}`")));
        }
        (start..=stop).step_by(step as usize).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<u32>().map_err(|e| bad(format!("`{}`: {e}", s.trim()))))
            .collect::<Result<_>>()?
    };
    grid.sort_unstable();
    if grid.windows(2).any(|w| w[0] == w[1]) {
        return Err(bad("values must be distinct".into()));
    }
    if grid.first() == Some(&0) {
        return Err(bad("every n must be >= 1".into()));
    }
    Ok(grid)
}

pub fn parse_config(source: &str) -> Result<RunConfig> {
    RawConfig::parse(source)?.build()
}

impl RunConfig {
    /// Renders every field in the config format; `parse_config` reads it back
    /// unchanged.
    pub fn to_config_string(&self) -> String {
        let e = &self.experiment;
        let mut out = String::new();
        let (pb, pa) = (e.prior.beta, e.prior.alpha2);
        let _ = writeln!(out, "[prior]");
        let _ = writeln!(out, "a1 = {}\nb1 = {}\na2 = {}\nb2 = {}", pb.shape(), pb.scale(), pa.shape(), pa.scale());
        let _ = writeln!(out, "\n[loss]\nloss = {}", e.loss.label());
        match e.loss {
            LossSpec::IntervalQuantile { rho } => {
                let _ = writeln!(out, "rho = {rho}");
            }
            LossSpec::IntervalCentered { gamma } => {
                let _ = writeln!(out, "gamma = {gamma}");
            }
            _ => {}
        }
        let m = &e.mcmc;
        let _ = writeln!(
            out,
            "\n[mcmc]\nburn_in = {}\nthin = {}\nkeep = {}\ninitial_step = {}\nadapt = {}\naccept_low = {}\naccept_high = {}",
            m.burn_in, m.thin, m.keep, m.initial_step, m.adapt_during_burn_in, m.target_acceptance.0, m.target_acceptance.1
        );
        let grid: Vec<String> = e.grid.iter().map(u32::to_string).collect();
        let _ = writeln!(
            out,
            "\n[run]\ncost = {}\ngrid = {}\nK = {}\nestimates_per_n = {}\nreplicates = {}\nseed = {}",
            e.unit_cost,
            grid.join(","),
            e.outer_reps,
            e.estimates_per_n,
            self.replicates,
            e.seed
        );
        out
    }
}
