//! Reproduction of the exactly known optimizers.

use anyhow::Result;
use graphon_core::graphon::MIN_RATE;
use graphon_core::sqp::multistart;
use graphon_core::{BlockGraphon, DensityPair, MultistartConfig, SolverOptions};

pub const UPPER_EPS: [f64; 5] = [0.09, 0.16, 0.25, 0.36, 0.49];
pub const ZERO_TRIANGLE_EPS: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
pub const HALF_DENSITY_TAU: [f64; 3] = [0.02, 0.06, 0.1];

/// Offsets keeping the boundary targets strictly inside the region.
pub const UPPER_OFFSET: f64 = 1e-9;
pub const ZERO_TRIANGLE_TAU: f64 = 1e-12;

pub const PARAM_THRESHOLD: f64 = 1e-6;
pub const ZERO_TRIANGLE_THRESHOLD: f64 = 1e-5;
pub const RATE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct BenchmarkOptions {
    /// Flip the sign of the off-diagonal offset in the `e = 1/2` references.
    pub inject_sign_bug: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub eps: f64,
    pub tau: f64,
    pub deviation: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    pub name: &'static str,
    pub threshold: f64,
    pub points: Vec<PointResult>,
}

impl FamilyResult {
    pub fn max_deviation(&self) -> f64 {
        self.points.iter().map(|p| p.deviation).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.deviation < self.threshold)
    }
}

fn coarse() -> MultistartConfig {
    MultistartConfig { l_c: 4, l_g: 4, ..Default::default() }
}

fn best(target: DensityPair, ms: &MultistartConfig, opts: &SolverOptions) -> Result<(BlockGraphon, f64)> {
    let out = multistart(2, target, ms, opts)?;
    let b = out.best();
    Ok((b.minimizer.clone(), b.rate))
}

/// Parameter deviation in the block count of the reference; a minimizer
/// with a different count is refined or compared as infinitely far.
fn deviation(found: &BlockGraphon, reference: &BlockGraphon) -> f64 {
    let mut g = found.clone();
    while g.n_blocks() < reference.n_blocks() {
        g = match g.refine(0) {
            Ok(r) => r,
            Err(_) => return f64::INFINITY,
        };
    }
    g.param_distance(reference)
}

/// `t = e^{3/2}`: a complete block of size `sqrt(e)`, empty elsewhere.
pub fn upper_boundary_family() -> Result<FamilyResult> {
    let opts = SolverOptions { g_floor: 1e-13, ..Default::default() };
    let mut points = Vec::new();
    for e in UPPER_EPS {
        let t = e.powf(1.5) - UPPER_OFFSET;
        let (g, rate) = best(DensityPair::new(e, t)?, &coarse(), &opts)?;
        let c = e.sqrt();
        let reference = BlockGraphon::from_upper(vec![c, 1.0 - c], vec![1.0, 0.0, 0.0])?;
        points.push(PointResult { eps: e, tau: t, deviation: deviation(&g, &reference), rate });
    }
    Ok(FamilyResult { name: "upper boundary", threshold: PARAM_THRESHOLD, points })
}

/// `t = 0`, `e < 1/2`: complete bipartite with equal halves and density `2e` across.
pub fn zero_triangle_family() -> Result<FamilyResult> {
    let opts = SolverOptions { g_floor: 1e-14, ..Default::default() };
    let mut points = Vec::new();
    for e in ZERO_TRIANGLE_EPS {
        let (g, rate) = best(DensityPair::new(e, ZERO_TRIANGLE_TAU)?, &coarse(), &opts)?;
        let reference = BlockGraphon::from_upper(vec![0.5, 0.5], vec![0.0, 2.0 * e, 0.0])?;
        points.push(PointResult { eps: e, tau: ZERO_TRIANGLE_TAU, deviation: deviation(&g, &reference), rate });
    }
    Ok(FamilyResult { name: "zero-triangle segment", threshold: ZERO_TRIANGLE_THRESHOLD, points })
}

/// `e = 1/2`: equal halves, diagonal `1/2 - d`, off-diagonal `1/2 + d`, `d = (1/8 - t)^{1/3}`.
pub fn half_density_family(opt: &BenchmarkOptions) -> Result<FamilyResult> {
    let opts = SolverOptions::default();
    let sign = if opt.inject_sign_bug { -1.0 } else { 1.0 };
    let mut points = Vec::new();
    for t in HALF_DENSITY_TAU {
        let (g, rate) = best(DensityPair::new(0.5, t)?, &coarse(), &opts)?;
        let d = sign * (0.125 - t).cbrt();
        let reference = BlockGraphon::from_upper(vec![0.5, 0.5], vec![0.5 - d, 0.5 + d, 0.5 - d])?;
        points.push(PointResult { eps: 0.5, tau: t, deviation: deviation(&g, &reference), rate });
    }
    Ok(FamilyResult { name: "half-density segment", threshold: PARAM_THRESHOLD, points })
}

/// `I = -ln(2)/2` at `(1/2, 1/8)` from the full default start grid.
pub fn global_minimum_family() -> Result<FamilyResult> {
    let (_, rate) = best(DensityPair::new(0.5, 0.125)?, &MultistartConfig::default(), &SolverOptions::default())?;
    let p = PointResult { eps: 0.5, tau: 0.125, deviation: (rate - MIN_RATE).abs(), rate };
    Ok(FamilyResult { name: "global minimum", threshold: RATE_THRESHOLD, points: vec![p] })
}

pub fn run_benchmark(opt: &BenchmarkOptions) -> Result<Vec<FamilyResult>> {
    Ok(vec![
        upper_boundary_family()?,
        zero_triangle_family()?,
        half_density_family(opt)?,
        global_minimum_family()?,
    ])
}

pub fn format_report(families: &[FamilyResult]) -> String {
    let mut s = String::new();
    for f in families {
        let verdict = if f.passed() { "ok" } else { "FAIL" };
        s.push_str(&format!(
            "{:<22} max deviation {:.3e} (threshold {:.0e}) {verdict}\n",
            f.name,
            f.max_deviation(),
            f.threshold
        ));
        for p in &f.points {
            s.push_str(&format!("    e={} t={:e} rate={:.12} deviation={:.3e}\n", p.eps, p.tau, p.rate, p.deviation));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_refines_single_block() {
        let g = BlockGraphon::constant(1, 0.5).unwrap();
        let r = BlockGraphon::from_upper(vec![0.5, 0.5], vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(deviation(&g, &r), 0.0);
        let three = BlockGraphon::constant(3, 0.5).unwrap();
        assert_eq!(deviation(&three, &r), f64::INFINITY);
    }

    #[test]
    fn sign_bug_fails_half_density() {
        let good = half_density_family(&BenchmarkOptions::default()).unwrap();
        assert!(good.passed(), "{:?}", good);
        let bad = half_density_family(&BenchmarkOptions { inject_sign_bug: true }).unwrap();
        assert!(!bad.passed());
    }
}
