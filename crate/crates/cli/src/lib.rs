//! Command-line front end: benchmarks, phase-space sweeps, boundary tables,
//! classification and SVG rendering.

pub mod benchmark;
pub mod boundary;
pub mod config;
pub mod record;
pub mod render;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use graphon_core::phase::{classify, CLASSIFY_TOL};
use graphon_core::sampler::run_sampler;
use graphon_core::{DensityPair, RescaleVariant, SamplerConfig};

use crate::config::{resolve_workers, Range, SweepConfig, TauMode};
use crate::record::{csv_line, SWEEP_HEADER, SWEEP_SCHEMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "graphon", version, about = "Entropy-maximizing graphons with edge and triangle constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce the exactly known optimizers; exit 1 if any deviates.
    Benchmark {
        /// Use a wrong-signed reference to exercise the failure path.
        #[arg(long)]
        inject_sign_bug: bool,
    },
    /// Solve a grid of targets into <output>/sweep.csv, resuming a partial file.
    Sweep(SweepArgs),
    /// Emit the boundary curves as CSV.
    Boundary {
        #[arg(long, default_value_t = 0.0)]
        eps_min: f64,
        #[arg(long, default_value_t = 1.0)]
        eps_max: f64,
        #[arg(long, default_value_t = 201)]
        eps_count: usize,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Phase label of (e, t) and its distance to each curve.
    Classify { eps: f64, tau: f64 },
    /// Draw a sweep or boundary CSV as SVG.
    Render {
        input: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Sweep column to color by: rate, c or label.
        #[arg(long, default_value = "rate")]
        field: render::Field,
    },
    /// Solve one target; prints a one-row sweep CSV.
    Solve {
        eps: f64,
        tau: f64,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        n_blocks: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo minimum over rescaled random block graphons.
    Sample {
        eps: f64,
        tau: f64,
        #[arg(long, default_value_t = 2)]
        n_blocks: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "affine")]
        variant: RescaleVariant,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML file; flags below override its values.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the GRAPHON_WORKERS environment variable.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    #[arg(long)]
    pub eps_count: Option<usize>,
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_count: Option<usize>,
    /// absolute_range or relative_to_curves.
    #[arg(long)]
    pub tau_mode: Option<TauMode>,
    #[arg(long, value_delimiter = ',')]
    pub n_blocks: Option<Vec<usize>>,
    /// Suppress per-row progress on standard error.
    #[arg(long, short)]
    pub quiet: bool,
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(p) => SweepConfig::load(p)?,
            None => SweepConfig::default(),
        };
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.eps.min, self.eps_min);
        set(&mut cfg.eps.max, self.eps_max);
        set(&mut cfg.tau.min, self.tau_min);
        set(&mut cfg.tau.max, self.tau_max);
        if let Some(c) = self.eps_count {
            cfg.eps.count = c;
        }
        if let Some(c) = self.tau_count {
            cfg.tau.count = c;
        }
        if let Some(m) = self.tau_mode {
            cfg.tau_mode = m;
        }
        if let Some(n) = &self.n_blocks {
            cfg.n_blocks = n.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Errors in arguments or configuration, reported with exit code 2.
#[derive(Debug)]
struct Usage(anyhow::Error);

fn usage<T>(r: Result<T>) -> std::result::Result<T, Usage> {
    r.map_err(Usage)
}

fn target(eps: f64, tau: f64) -> std::result::Result<DensityPair, Usage> {
    usage(DensityPair::new(eps, tau).map_err(Into::into))
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn write_output(path: &Option<PathBuf>, bytes: &[u8], out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => Ok(out.write_all(bytes)?),
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<i32, Failure> {
    match cli.command {
        Command::Benchmark { inject_sign_bug } => {
            let families = benchmark::run_benchmark(&benchmark::BenchmarkOptions { inject_sign_bug })?;
            out.write_all(benchmark::format_report(&families).as_bytes())?;
            let ok = families.iter().all(|f| f.passed());
            writeln!(out, "{}", if ok { "benchmark passed" } else { "benchmark FAILED" })?;
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Sweep(args) => {
            let cfg = usage(args.resolve())?;
            let workers = usage(resolve_workers(args.workers, cfg.workers))?;
            let total = cfg.grid_len();
            let quiet = args.quiet;
            let summary = sweep::run_sweep(&cfg, workers, |r| {
                if !quiet {
                    let _ = writeln!(err, "[{}/{}] e={} t={} {} converged={}", r.idx + 1, total, r.eps, r.tau, r.label, r.converged);
                }
            })?;
            writeln!(
                out,
                "{}: {} rows ({} resumed), {} converged",
                cfg.output.join(sweep::SWEEP_FILE).display(),
                summary.rows,
                summary.resumed,
                summary.converged
            )?;
            Ok(EXIT_OK)
        }
        Command::Boundary { eps_min, eps_max, eps_count, output } => {
            let range = Range { min: eps_min, max: eps_max, count: eps_count };
            usage(SweepConfig { eps: range, ..Default::default() }.validate())?;
            let pts = boundary::trace(&range)?;
            write_output(&output, &boundary::boundary_csv(&pts), out)?;
            Ok(EXIT_OK)
        }
        Command::Classify { eps, tau } => {
            let c = boundary::classify_point(target(eps, tau)?);
            writeln!(out, "label={}", c.label)?;
            for (name, d) in c.distances {
                writeln!(out, "distance_{name}={d:e}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Render { input, output, field } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let svg = render::render_csv(&text, field)?;
            write_output(&output, svg.as_bytes(), out)?;
            Ok(EXIT_OK)
        }
        Command::Solve { eps, tau, n_blocks, seed } => {
            let t = target(eps, tau)?;
            let cfg = SweepConfig { n_blocks, seed, ..Default::default() };
            usage(cfg.validate())?;
            let r = sweep::solve_point(&cfg, 0, t);
            let mut bytes = format!("{SWEEP_SCHEMA}\n").into_bytes();
            bytes.extend(csv_line(&SWEEP_HEADER.map(String::from)));
            bytes.extend(csv_line(&r.to_fields()));
            out.write_all(&bytes)?;
            Ok(if r.converged { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Sample { eps, tau, n_blocks, samples, seed, variant } => {
            let t = target(eps, tau)?;
            let cfg = SamplerConfig { n_blocks, n_samples: samples, seed, rescale_variant: variant, ..Default::default() };
            usage(cfg.validate().map_err(Into::into))?;
            let best = run_sampler(&cfg, t).map_err(anyhow::Error::from)?;
            writeln!(out, "label={}", classify(t, CLASSIFY_TOL))?;
            writeln!(out, "best_rate={}", best.best_rate)?;
            writeln!(out, "accepted={} rejected={}", best.n_accepted, best.n_rejected)?;
            writeln!(out, "fractions={:?}", best.best_graphon.fractions())?;
            writeln!(out, "upper={:?}", best.best_graphon.upper())?;
            Ok(EXIT_OK)
        }
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}
