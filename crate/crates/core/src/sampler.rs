//! Monte Carlo global search over random block graphons.
//!
//! Each sample draws block sizes and values uniformly, maps them onto the
//! constraint set `e = edge, t = triangle`, and evaluates the rate. The
//! minimum over all accepted samples is the estimate of `I_N`.
//!
//! Sample `l` draws from its own ChaCha8 stream (`seed`, stream `l`), so
//! results do not depend on the number of worker threads and runs with a
//! larger sample count extend runs with a smaller one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::{n_upper, upper_pairs, BlockGraphon, DensityPair};
use crate::poly::{real_roots_cubic, real_roots_quadratic};

/// Tolerance on `|e - edge|` and `|t - triangle|` for an accepted sample.
pub const ACCEPT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RescaleVariant {
    /// `g -> gamma g + shift` with `(gamma, shift)` solved from the constraints.
    Affine,
    /// Two entries solved from the constraints, the rest kept from the raw draw.
    Rootfind,
}

impl std::str::FromStr for RescaleVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affine" => Ok(Self::Affine),
            "rootfind" => Ok(Self::Rootfind),
            other => Err(Error::Config(format!("unknown rescale variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub n_blocks: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub rescale_variant: RescaleVariant,
    pub max_rejects_per_sample: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_blocks: 2,
            n_samples: 10_000,
            seed: 0,
            rescale_variant: RescaleVariant::Affine,
            max_rejects_per_sample: 10_000,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_blocks == 0 || self.n_samples == 0 || self.max_rejects_per_sample == 0 {
            return Err(Error::Config(
                "n_blocks, n_samples and max_rejects_per_sample must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Minimum found by [`run_sampler`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBest {
    pub best_rate: f64,
    pub best_graphon: BlockGraphon,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

/// Result of an affine rescale.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRescale {
    pub graphon: BlockGraphon,
    pub gamma: f64,
    pub shift: f64,
    /// Other admissible roots of the cubic, by increasing `|gamma - 1|`.
    pub alternates: Vec<f64>,
}

fn full_matrix(n: usize, upper: &[f64]) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for ((i, j), &v) in upper_pairs(n).zip(upper) {
        m[i][j] = v;
        m[j][i] = v;
    }
    m
}

/// `(sum_ij d_ij c_i c_j, sum_ijk d_ij d_jk c_i c_j c_k, sum_ijk d_ij d_jk d_ki c_i c_j c_k)`
/// for an arbitrary (signed) symmetric matrix.
fn moments(c: &[f64], d: &[Vec<f64>]) -> (f64, f64, f64) {
    let n = c.len();
    let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            m1 += d[i][j] * c[i] * c[j];
            for k in 0..n {
                let w = c[i] * c[j] * c[k];
                m2 += d[i][j] * d[j][k] * w;
                m3 += d[i][j] * d[j][k] * d[k][i] * w;
            }
        }
    }
    (m1, m2, m3)
}

fn satisfies(g: &BlockGraphon, target: DensityPair) -> bool {
    (g.edge_density() - target.edge).abs() <= ACCEPT_TOL
        && (g.triangle_density() - target.triangle).abs() <= ACCEPT_TOL
}

/// Map `raw` onto the constraint set by `g_ij -> gamma g_ij + shift`.
///
/// The edge constraint fixes `shift = edge - gamma e(raw)`, so the values
/// become `edge + gamma d_ij` with `d = raw - e(raw)`. The triangle
/// constraint is then the cubic
/// `m3 gamma^3 + 3 edge m2 gamma^2 + (edge^3 - triangle) = 0`.
/// Returns `None` when no real root keeps every value in `[0, 1]`.
pub fn rescale_affine(raw: &BlockGraphon, target: DensityPair) -> Option<AffineRescale> {
    let n = raw.n_blocks();
    let c = raw.fractions();
    let mean = raw.edge_density();
    let centred: Vec<f64> = raw.upper().iter().map(|v| v - mean).collect();
    let d = full_matrix(n, &centred);
    let (_, m2, m3) = moments(c, &d);
    let eps = target.edge;
    let a0 = eps.powi(3) - target.triangle;

    let spread = centred.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut gammas = if spread < 1e-15 {
        // constant raw sample: any gamma, the image is the constant `edge`
        if a0.abs() <= ACCEPT_TOL { vec![1.0] } else { Vec::new() }
    } else {
        real_roots_cubic(m3, 3.0 * eps * m2, 0.0, a0)
    };
    gammas.sort_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()));

    let mut admissible = gammas.into_iter().filter_map(|gamma| {
        let upper: Vec<f64> = centred.iter().map(|dv| eps + gamma * dv).collect();
        if upper.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return None;
        }
        let g = BlockGraphon::from_upper(c.to_vec(), upper).ok()?;
        satisfies(&g, target).then_some((gamma, g))
    });
    let (gamma, graphon) = admissible.next()?;
    let alternates = admissible.map(|(gm, _)| gm).collect();
    Some(AffineRescale {
        graphon,
        gamma,
        shift: eps - gamma * mean,
        alternates,
    })
}

/// Solve `e = edge, t = triangle` for the two packed upper-triangle entries
/// `free` (indices into [`BlockGraphon::upper`]), keeping all other entries
/// of `raw`. Returns every root with both unknowns in `[0, 1]`.
///
/// The edge density is linear in each entry, so one unknown is eliminated
/// exactly and the triangle density restricted to that line is a cubic in
/// the other; its coefficients are recovered by interpolation at four nodes.
pub fn rescale_rootfind(
    raw: &BlockGraphon,
    target: DensityPair,
    free: (usize, usize),
) -> Vec<BlockGraphon> {
    let n = raw.n_blocks();
    let m = n_upper(n);
    let (a, b) = free;
    if a == b || a >= m || b >= m {
        return Vec::new();
    }
    let c = raw.fractions();
    let pairs: Vec<(usize, usize)> = upper_pairs(n).collect();
    let weight = |k: usize| {
        let (i, j) = pairs[k];
        if i == j { c[i] * c[i] } else { 2.0 * c[i] * c[j] }
    };
    // solve for the entry with the larger edge weight, parameterize by the other
    let (solved, param) = if weight(a) >= weight(b) { (a, b) } else { (b, a) };
    let (ws, wp) = (weight(solved), weight(param));
    if ws <= 1e-14 {
        return Vec::new();
    }
    let base: f64 = (0..m)
        .filter(|&k| k != solved && k != param)
        .map(|k| weight(k) * raw.upper()[k])
        .sum();
    let solved_at = |x: f64| (target.edge - base - wp * x) / ws;

    let triangle_at = |x: f64| {
        let mut upper = raw.upper().to_vec();
        upper[param] = x;
        upper[solved] = solved_at(x);
        let g = full_matrix(n, &upper);
        let mut t = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t += g[i][j] * g[j][k] * g[k][i] * c[i] * c[j] * c[k];
                }
            }
        }
        t - target.triangle
    };
    let nodes = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
    let vals = nodes.map(triangle_at);
    let [k3, k2, k1, k0] = monomial_from_samples(&nodes, &vals);

    let mut xs = real_roots_cubic(k3, k2, k1, k0);
    // double roots can be lost to rounding; critical points that nearly touch zero are kept
    for x in real_roots_quadratic(3.0 * k3, 2.0 * k2, k1) {
        if !xs.iter().any(|r| (r - x).abs() <= 1e-9) && triangle_at(x).abs() <= ACCEPT_TOL {
            xs.push(x);
        }
    }
    if xs.is_empty() && vals.iter().all(|v| v.abs() <= ACCEPT_TOL) {
        // the whole line satisfies both constraints; keep the raw value
        xs.push(raw.upper()[param]);
    }
    xs.sort_by(f64::total_cmp);
    xs.into_iter()
        .filter_map(|x| {
            let y = solved_at(x);
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return None;
            }
            let mut upper = raw.upper().to_vec();
            upper[param] = x;
            upper[solved] = y;
            let g = BlockGraphon::from_upper(c.to_vec(), upper).ok()?;
            satisfies(&g, target).then_some(g)
        })
        .collect()
}

/// Coefficients `[k3, k2, k1, k0]` of the cubic through four samples (Newton form expanded).
fn monomial_from_samples(x: &[f64; 4], y: &[f64; 4]) -> [f64; 4] {
    let mut dd = *y;
    for level in 1..4 {
        for i in (level..4).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (x[i] - x[i - level]);
        }
    }
    // p(x) = dd0 + dd1 (x-x0) + dd2 (x-x0)(x-x1) + dd3 (x-x0)(x-x1)(x-x2)
    let mut coef = [0.0_f64; 4]; // ascending powers
    let mut basis = [1.0, 0.0, 0.0, 0.0];
    for (level, &d) in dd.iter().enumerate() {
        for p in 0..4 {
            coef[p] += d * basis[p];
        }
        if level < 3 {
            let mut next = [0.0; 4];
            for p in 0..4 {
                if p + 1 < 4 {
                    next[p + 1] += basis[p];
                }
                next[p] -= x[level] * basis[p];
            }
            basis = next;
        }
    }
    [coef[3], coef[2], coef[1], coef[0]]
}

/// Stream for sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform block sizes (normalized) and uniform symmetric values.
pub fn draw_raw<R: Rng>(rng: &mut R, n: usize) -> BlockGraphon {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        if total <= f64::MIN_POSITIVE {
            continue;
        }
        let mut c: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let head: f64 = c[..n - 1].iter().sum();
        c[n - 1] = (1.0 - head).max(0.0);
        let upper = (0..n_upper(n)).map(|_| rng.random::<f64>()).collect();
        if let Ok(g) = BlockGraphon::from_upper(c, upper) {
            return g;
        }
    }
}

struct SampleOutcome {
    best: Option<(f64, BlockGraphon)>,
    accepted: usize,
    rejected: usize,
}

fn one_sample(cfg: &SamplerConfig, target: DensityPair, index: usize) -> SampleOutcome {
    let mut rng = sample_rng(cfg.seed, index as u64);
    let n = cfg.n_blocks;
    let mut rejected = 0;
    for _ in 0..cfg.max_rejects_per_sample {
        let raw = draw_raw(&mut rng, n);
        let accepted: Vec<BlockGraphon> = match cfg.rescale_variant {
            RescaleVariant::Affine => rescale_affine(&raw, target).map(|r| r.graphon).into_iter().collect(),
            RescaleVariant::Rootfind => {
                let m = n_upper(n);
                if m < 2 {
                    rescale_affine(&raw, target).map(|r| r.graphon).into_iter().collect()
                } else {
                    let a = rng.random_range(0..m);
                    let mut b = rng.random_range(0..m - 1);
                    if b >= a {
                        b += 1;
                    }
                    rescale_rootfind(&raw, target, (a, b))
                }
            }
        };
        if accepted.is_empty() {
            rejected += 1;
            continue;
        }
        let count = accepted.len();
        let best = accepted
            .into_iter()
            .map(|g| (g.rate().rate, g))
            .min_by(|x, y| x.0.total_cmp(&y.0));
        return SampleOutcome { best, accepted: count, rejected };
    }
    SampleOutcome { best: None, accepted: 0, rejected }
}

/// Draw `n_samples` constrained samples and return the one with the smallest rate.
pub fn run_sampler(cfg: &SamplerConfig, target: DensityPair) -> Result<SampleBest> {
    cfg.validate()?;
    let reduce = |a: (Option<(f64, usize, BlockGraphon)>, usize, usize),
                  b: (Option<(f64, usize, BlockGraphon)>, usize, usize)| {
        let best = match (a.0, b.0) {
            (Some(x), Some(y)) => {
                // ties go to the lower sample index so the result is schedule independent
                if (y.0, y.1) < (x.0, x.1) { Some(y) } else { Some(x) }
            }
            (x, None) => x,
            (None, y) => y,
        };
        (best, a.1 + b.1, a.2 + b.2)
    };
    let (best, accepted, rejected) = (0..cfg.n_samples)
        .into_par_iter()
        .map(|l| {
            let out = one_sample(cfg, target, l);
            (out.best.map(|(r, g)| (r, l, g)), out.accepted, out.rejected)
        })
        .reduce(|| (None, 0, 0), reduce);
    match best {
        Some((rate, _, graphon)) => Ok(SampleBest {
            best_rate: rate,
            best_graphon: graphon,
            n_accepted: accepted,
            n_rejected: rejected,
        }),
        None => Err(Error::Infeasible {
            edge: target.edge,
            triangle: target.triangle,
        }),
    }
}
