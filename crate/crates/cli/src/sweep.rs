//! Resumable grid sweeps over the `(e, t)` plane.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use graphon_core::phase::{classify, lower_envelope, upper_boundary, CLASSIFY_TOL};
use graphon_core::sampler::run_sampler;
use graphon_core::sqp::{multistart_outcome, solve_local};
use graphon_core::{DensityPair, PhaseLabel, SamplerConfig, SolveReport};
use rayon::prelude::*;

use crate::config::{SweepConfig, TauMode};
use crate::record::{csv_line, parse_rows, SweepRecord, SWEEP_HEADER, SWEEP_SCHEMA};

pub const SWEEP_FILE: &str = "sweep.csv";

/// Grid targets with `e` as the outer index.
pub fn grid(cfg: &SweepConfig) -> Result<Vec<DensityPair>> {
    let taus = cfg.tau.points();
    let mut out = Vec::with_capacity(cfg.grid_len());
    for e in cfg.eps.points() {
        let (lo, hi) = match cfg.tau_mode {
            TauMode::AbsoluteRange => (0.0, 1.0),
            TauMode::RelativeToCurves => (lower_envelope(e)?, upper_boundary(e)),
        };
        for &f in &taus {
            let t = match cfg.tau_mode {
                TauMode::AbsoluteRange => f,
                TauMode::RelativeToCurves => lo + f * (hi - lo),
            };
            out.push(DensityPair::new(e, t)?);
        }
    }
    Ok(out)
}

fn better(a: &SolveReport, b: &SolveReport) -> bool {
    match (a.converged, b.converged) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => a.rate < b.rate,
        (false, false) => (a.constraint_violation, a.rate) < (b.constraint_violation, b.rate),
    }
}

/// Multistart over every configured block count. When nothing converges the
/// point is retried once from the sampler's best graphon.
pub fn solve_point(cfg: &SweepConfig, idx: usize, target: DensityPair) -> SweepRecord {
    let label = classify(target, CLASSIFY_TOL);
    let first_n = cfg.n_blocks[0];
    if label == PhaseLabel::Infeasible {
        return SweepRecord::failed(idx, target, label, first_n);
    }
    let ms = graphon_core::MultistartConfig { seed: cfg.seed, ..cfg.multistart.clone() };
    let mut best: Option<(usize, SolveReport)> = None;
    let offer = |n: usize, r: SolveReport, best: &mut Option<(usize, SolveReport)>| {
        if best.as_ref().is_none_or(|(_, b)| better(&r, b)) {
            *best = Some((n, r));
        }
    };
    for &n in &cfg.n_blocks {
        if let Ok(out) = multistart_outcome(n, target, &ms, &cfg.solver) {
            if let Some(r) = out.classes.into_iter().next().or(out.best_unconverged) {
                offer(n, r, &mut best);
            }
        }
    }
    if best.as_ref().is_none_or(|(_, r)| !r.converged) {
        for &n in &cfg.n_blocks {
            let sc = SamplerConfig {
                n_blocks: n,
                seed: cfg.seed.wrapping_add(idx as u64),
                ..cfg.sampler.clone()
            };
            let Ok(s) = run_sampler(&sc, target) else { continue };
            if let Ok(r) = solve_local(&s.best_graphon, target, &cfg.solver) {
                offer(n, r, &mut best);
            }
        }
    }
    match best {
        Some((n, r)) => SweepRecord::from_report(idx, target, label, n, &r),
        None => SweepRecord::failed(idx, target, label, first_n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSummary {
    pub rows: usize,
    pub resumed: usize,
    pub converged: usize,
}

/// Comment line tying the file to the settings that determine its rows.
fn config_line(cfg: &SweepConfig) -> Result<String> {
    let mut key = cfg.clone();
    key.output = PathBuf::new();
    key.workers = None;
    Ok(format!("#config={}", serde_json::to_string(&key)?))
}

/// Rows already on disk. A torn final line is cut off; rows must match the
/// grid in order.
fn resume(path: &Path, cfg_line: &str, grid: &[DensityPair]) -> Result<Vec<SweepRecord>> {
    let mut text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(end) = text.rfind('\n') {
        if end + 1 != text.len() {
            text.truncate(end + 1);
            let f = OpenOptions::new().write(true).open(path)?;
            f.set_len(text.len() as u64)?;
        }
    } else {
        text.clear();
    }
    let mut lines = text.lines();
    if lines.next() != Some(SWEEP_SCHEMA) {
        bail!("{} is not a {} file", path.display(), SWEEP_SCHEMA.trim_start_matches("#schema="));
    }
    if lines.next() != Some(cfg_line) {
        bail!("{} was written with a different configuration", path.display());
    }
    let rows = parse_rows(&text)?;
    for (k, r) in rows.iter().enumerate() {
        let g = grid.get(k).with_context(|| format!("{} has more rows than the grid", path.display()))?;
        if r.idx != k || r.eps != g.edge || r.tau != g.triangle {
            bail!("row {k} of {} does not match the grid", path.display());
        }
    }
    Ok(rows)
}

fn start_file(path: &Path, cfg_line: &str) -> Result<File> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut head = format!("{SWEEP_SCHEMA}\n{cfg_line}\n").into_bytes();
    head.extend(csv_line(&SWEEP_HEADER.map(String::from)));
    f.write_all(&head)?;
    f.sync_data()?;
    Ok(f)
}

/// Run the sweep into `<output>/sweep.csv`, continuing a partial file.
///
/// Points are solved in parallel batches and appended in grid order, one
/// complete line per write, so an interrupted run leaves a valid prefix.
pub fn run_sweep(cfg: &SweepConfig, workers: usize, mut progress: impl FnMut(&SweepRecord)) -> Result<SweepSummary> {
    cfg.validate()?;
    let grid = grid(cfg)?;
    std::fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;
    let path = cfg.output.join(SWEEP_FILE);
    let cfg_line = config_line(cfg)?;

    let (done, mut file) = if path.exists() {
        let rows = resume(&path, &cfg_line, &grid)?;
        (rows, OpenOptions::new().append(true).open(&path)?)
    } else {
        (Vec::new(), start_file(&path, &cfg_line)?)
    };
    let resumed = done.len();
    let mut converged = done.iter().filter(|r| r.converged).count();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let batch = 4 * workers;
    let todo: Vec<(usize, DensityPair)> = grid.iter().copied().enumerate().skip(resumed).collect();
    for chunk in todo.chunks(batch) {
        let rows: Vec<SweepRecord> = pool.install(|| chunk.par_iter().map(|&(i, t)| solve_point(cfg, i, t)).collect());
        for r in rows {
            file.write_all(&csv_line(&r.to_fields()))?;
            file.flush()?;
            converged += r.converged as usize;
            progress(&r);
        }
        file.sync_data()?;
    }
    Ok(SweepSummary { rows: grid.len(), resumed, converged })
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_rows(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Range;

    fn tiny(dir: &Path) -> SweepConfig {
        SweepConfig {
            eps: Range { min: 0.3, max: 0.6, count: 2 },
            tau: Range { min: 0.2, max: 0.6, count: 2 },
            output: dir.to_path_buf(),
            ..Default::default()
        }
    }

    #[test]
    fn relative_grid_lies_inside_the_region() {
        let cfg = tiny(Path::new("unused"));
        let g = grid(&cfg).unwrap();
        assert_eq!(g.len(), 4);
        for t in &g {
            assert!(t.triangle > lower_envelope(t.edge).unwrap());
            assert!(t.triangle < upper_boundary(t.edge));
        }
        assert_eq!(g[0].edge, 0.3);
        assert_eq!(g[0].triangle, 0.2 * upper_boundary(0.3));
    }

    #[test]
    fn absolute_grid_uses_tau_directly() {
        let cfg = SweepConfig {
            tau_mode: TauMode::AbsoluteRange,
            ..tiny(Path::new("unused"))
        };
        let g = grid(&cfg).unwrap();
        assert_eq!(g.iter().map(|t| t.triangle).collect::<Vec<_>>(), vec![0.2, 0.6, 0.2, 0.6]);
    }

    #[test]
    fn infeasible_points_are_flagged() {
        let cfg = SweepConfig::default();
        let r = solve_point(&cfg, 5, DensityPair::new(0.9, 0.95).unwrap());
        assert_eq!(r.label, PhaseLabel::Infeasible);
        assert!(!r.converged && r.rate.is_nan());
        assert_eq!(r.idx, 5);
    }

    #[test]
    fn solved_point_reproduces_target() {
        let cfg = SweepConfig::default();
        let t = DensityPair::new(0.3, 0.0957).unwrap();
        let r = solve_point(&cfg, 0, t);
        assert!(r.converged);
        let g = r.graphon.unwrap();
        assert!((g.edge_density() - 0.3).abs() < 1e-8);
        assert!((g.triangle_density() - 0.0957).abs() < 1e-8);
    }
}
