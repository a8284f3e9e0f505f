//! Sweep configuration, read from TOML and overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use graphon_core::{MultistartConfig, SamplerConfig, SolverOptions};
use serde::{Deserialize, Serialize};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "GRAPHON_WORKERS";

/// Inclusive, evenly spaced range; a single point sits at `min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| self.min + (self.max - self.min) * k as f64 / last)
            .collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.count == 0 {
            bail!("{what}: count must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.min) || !(0.0..=1.0).contains(&self.max) || self.min > self.max {
            bail!("{what}: need 0 <= min <= max <= 1, got [{}, {}]", self.min, self.max);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauMode {
    /// `tau` taken directly from the range.
    AbsoluteRange,
    /// The range gives fractions between the lower envelope and `e^{3/2}`.
    RelativeToCurves,
}

impl std::str::FromStr for TauMode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute_range" | "absolute" => Ok(Self::AbsoluteRange),
            "relative_to_curves" | "relative" => Ok(Self::RelativeToCurves),
            other => bail!("unknown tau mode {other:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eps: Range,
    pub tau: Range,
    pub tau_mode: TauMode,
    pub n_blocks: Vec<usize>,
    pub seed: u64,
    pub output: PathBuf,
    pub workers: Option<usize>,
    pub solver: SolverOptions,
    pub multistart: MultistartConfig,
    /// Used for the retry of points where no start converged.
    pub sampler: SamplerConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps: Range { min: 0.05, max: 0.95, count: 10 },
            tau: Range { min: 0.05, max: 0.95, count: 10 },
            tau_mode: TauMode::RelativeToCurves,
            n_blocks: vec![2],
            seed: 0,
            output: PathBuf::from("sweep-out"),
            workers: None,
            solver: SolverOptions::default(),
            multistart: MultistartConfig { l_c: 4, l_g: 4, ..Default::default() },
            sampler: SamplerConfig { n_samples: 2000, ..Default::default() },
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing sweep config")?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.eps.validate("eps")?;
        self.tau.validate("tau")?;
        if self.n_blocks.is_empty() || self.n_blocks.contains(&0) {
            bail!("n_blocks must be a nonempty list of positive counts");
        }
        if self.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        self.solver.validate()?;
        self.multistart.validate()?;
        self.sampler.validate()?;
        Ok(())
    }

    pub fn grid_len(&self) -> usize {
        self.eps.count * self.tau.count
    }
}

/// Worker count: flag, then environment, then config, then all cores.
pub fn resolve_workers(flag: Option<usize>, cfg: Option<usize>) -> Result<usize> {
    let env = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().with_context(|| format!("{WORKERS_ENV}={v:?} is not a count"))?),
        Err(_) => None,
    };
    let n = flag
        .or(env)
        .or(cfg)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        bail!("worker count must be at least 1");
    }
    Ok(n)
}
