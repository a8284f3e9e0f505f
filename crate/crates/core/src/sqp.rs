//! Local minimization of `I` at fixed `(e, t)` by sequential quadratic
//! programming, and grid multistart for global coverage.
//!
//! Decision vector: reduced fractions `c_1..c_{N-1}` followed by the packed
//! upper triangle of `g`. Bounds are `c_p >= 0`, `c_N = 1 - sum c_p >= 0`
//! and `g_ij` in `[g_floor, 1 - g_floor]`; the densities are equalities.
//!
//! Each iteration first computes a bound-respecting Levenberg step `v`
//! toward the linearized constraints, then solves the QP
//! `min grad' p + p'Hp/2` subject to `J p = J v` and the bounds. With
//! `J_e` and `J_t` parallel (on the ER curve) the equalities are
//! rank-deficient but still consistent. `H` is a BFGS approximation of the
//! Lagrangian Hessian started from the identity; steps are globalized with
//! an l2 merit function, backtracking and a second-order correction.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::{decision_len, n_upper, BlockGraphon, DensityPair, CANONICAL_TOL};
use crate::qp::{lstsq, solve_lsq, solve_qp, LsqProblem, QpProblem};
use crate::sampler::{draw_raw, rescale_affine, rescale_rootfind, sample_rng};

/// Levenberg damping of the restoration step.
const NORMAL_DAMPING: f64 = 1e-14;
const ARMIJO: f64 = 1e-4;
/// Multistart tops up the projected grid starts to this many with random draws.
const MIN_PROJECTED_STARTS: usize = 8;
const TOP_UP_DRAWS: usize = 20_000;
const TOP_UP_BATCH: usize = 500;
const TOP_UP_SEED: u64 = 0x05ee_d0f5_ca1e;
/// Max-norm bound on a single step, adapted between these limits.
const INITIAL_RADIUS: f64 = 0.1;
const MAX_RADIUS: f64 = 0.5;
const MIN_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub kkt_tol: f64,
    pub constraint_tol: f64,
    /// Steps with max-norm below this end the iteration.
    pub step_tol: f64,
    pub g_floor: f64,
    /// Consecutive skipped BFGS updates before `H` is reset to the identity.
    pub hessian_reset_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 300,
            kkt_tol: 1e-9,
            constraint_tol: 1e-10,
            step_tol: 1e-15,
            g_floor: 1e-9,
            hessian_reset_threshold: 5,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let tols = [self.kkt_tol, self.constraint_tol, self.step_tol, self.g_floor];
        if tols.iter().any(|t| !(*t > 0.0)) || self.g_floor >= 0.5 {
            return Err(Error::Config("solver tolerances must be positive and g_floor < 1/2".into()));
        }
        if self.max_iters == 0 || self.hessian_reset_threshold == 0 {
            return Err(Error::Config("max_iters and hessian_reset_threshold must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub minimizer: BlockGraphon,
    pub rate: f64,
    pub kkt_residual: f64,
    pub constraint_violation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub start_id: usize,
    /// Merit value before and after each accepted step, at that step's penalty weight.
    #[serde(skip)]
    pub merit_steps: Vec<(f64, f64)>,
}

struct Problem {
    n: usize,
    dim: usize,
    target: DensityPair,
    g_floor: f64,
}

struct Eval {
    graphon: BlockGraphon,
    f: f64,
    grad: DVector<f64>,
    r: DVector<f64>,
    jac: DMatrix<f64>,
}

impl Eval {
    fn violation(&self) -> f64 {
        self.r.amax()
    }

    fn rnorm(&self) -> f64 {
        self.r.norm()
    }
}

impl Problem {
    fn new(n: usize, target: DensityPair, g_floor: f64) -> Self {
        Self { n, dim: decision_len(n), target, g_floor }
    }

    fn nc(&self) -> usize {
        self.n - 1
    }

    /// Force `x` into the bounds.
    fn clamp(&self, x: &mut DVector<f64>) {
        let nc = self.nc();
        for k in 0..nc {
            x[k] = x[k].max(0.0);
        }
        let s: f64 = (0..nc).map(|k| x[k]).sum();
        if s > 1.0 {
            for k in 0..nc {
                x[k] /= s;
            }
        }
        for k in nc..self.dim {
            x[k] = x[k].clamp(self.g_floor, 1.0 - self.g_floor);
        }
    }

    fn graphon(&self, x: &DVector<f64>) -> BlockGraphon {
        let nc = self.nc();
        let mut c: Vec<f64> = (0..nc).map(|k| x[k].max(0.0)).collect();
        let s: f64 = c.iter().sum();
        if s > 1.0 {
            c.iter_mut().for_each(|v| *v /= s);
        }
        let head: f64 = c.iter().sum();
        c.push((1.0 - head).max(0.0));
        let upper = (nc..self.dim).map(|k| x[k].clamp(0.0, 1.0)).collect();
        BlockGraphon::from_upper(c, upper).expect("iterate within bounds")
    }

    fn eval(&self, x: &DVector<f64>) -> Eval {
        let graphon = self.graphon(x);
        let grad = graphon
            .grad_rate()
            .expect("iterate values stay inside (0, 1)")
            .to_vec();
        let (ge, gt) = graphon.grad_constraints();
        let mut jac = DMatrix::zeros(2, self.dim);
        jac.row_mut(0).copy_from_slice(&ge.to_vec());
        jac.row_mut(1).copy_from_slice(&gt.to_vec());
        let r = DVector::from_vec(vec![
            graphon.edge_density() - self.target.edge,
            graphon.triangle_density() - self.target.triangle,
        ]);
        Eval {
            f: graphon.rate().rate,
            grad: DVector::from_vec(grad),
            graphon,
            r,
            jac,
        }
    }

    /// Rows `G p >= h` keeping `x + p` inside the bounds and `|p_k| <= radius`.
    fn step_constraints(&self, x: &DVector<f64>, radius: f64) -> (DMatrix<f64>, DVector<f64>) {
        let nc = self.nc();
        let rows = 2 * self.dim + usize::from(nc > 0);
        let mut g = DMatrix::zeros(rows, self.dim);
        let mut h = DVector::zeros(rows);
        for k in 0..self.dim {
            let (lo, hi) = if k < nc {
                (0.0, 1.0)
            } else {
                (self.g_floor, 1.0 - self.g_floor)
            };
            g[(2 * k, k)] = 1.0;
            h[2 * k] = (lo - x[k]).max(-radius).min(0.0);
            g[(2 * k + 1, k)] = -1.0;
            h[2 * k + 1] = -(hi - x[k]).min(radius).max(0.0);
        }
        if nc > 0 {
            let r = 2 * self.dim;
            let head: f64 = (0..nc).map(|k| x[k]).sum();
            for k in 0..nc {
                g[(r, k)] = -1.0;
            }
            h[r] = (head - 1.0).min(0.0);
        }
        (g, h)
    }

    /// Normals (pointing into the feasible side) of bounds active at `x`.
    fn active_normals(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        let nc = self.nc();
        let tol_g = (0.5 * self.g_floor).min(1e-10);
        let mut normals = Vec::new();
        let unit = |k: usize, s: f64| {
            let mut v = DVector::zeros(self.dim);
            v[k] = s;
            v
        };
        for k in 0..nc {
            if x[k] <= 1e-12 {
                normals.push(unit(k, 1.0));
            }
        }
        if nc > 0 {
            let head: f64 = (0..nc).map(|k| x[k]).sum();
            if 1.0 - head <= 1e-12 {
                let mut v = DVector::zeros(self.dim);
                for k in 0..nc {
                    v[k] = -1.0;
                }
                normals.push(v);
            }
        }
        for k in nc..self.dim {
            if x[k] - self.g_floor <= tol_g {
                normals.push(unit(k, 1.0));
            } else if (1.0 - self.g_floor) - x[k] <= tol_g {
                normals.push(unit(k, -1.0));
            }
        }
        normals
    }

    /// Stationarity residual after a least-squares multiplier fit with
    /// sign-constrained bound multipliers.
    fn kkt(&self, x: &DVector<f64>, ev: &Eval) -> f64 {
        let mut normals = self.active_normals(x);
        loop {
            let cols = 2 + normals.len();
            let mut m = DMatrix::zeros(self.dim, cols);
            m.set_column(0, &ev.jac.row(0).transpose());
            m.set_column(1, &ev.jac.row(1).transpose());
            for (k, v) in normals.iter().enumerate() {
                m.set_column(2 + k, v);
            }
            let lam = lstsq(&m, &ev.grad);
            let worst = (0..normals.len())
                .map(|k| (k, lam[2 + k]))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                Some((k, v)) if v < 0.0 => {
                    normals.remove(k);
                }
                _ => return (&ev.grad - &m * lam).amax(),
            }
        }
    }

    /// Bound-respecting damped Gauss-Newton step toward `jac q + r = 0` from `x`.
    fn restoration_step(&self, x: &DVector<f64>, jac: &DMatrix<f64>, r: &DVector<f64>, radius: f64) -> DVector<f64> {
        let scale = 1.0 + (jac.transpose() * jac).amax();
        let damping = (NORMAL_DAMPING * scale).sqrt();
        // min |J q + r|^2 + damping^2 |q|^2 as one stacked least-squares system
        let mut a = DMatrix::zeros(2 + self.dim, self.dim);
        a.view_mut((0, 0), (2, self.dim)).copy_from(jac);
        a.view_mut((2, 0), (self.dim, self.dim)).fill_diagonal(damping);
        let mut b = DVector::zeros(2 + self.dim);
        b.rows_mut(0, 2).copy_from(&(-r));
        let (gi, hi) = self.step_constraints(x, radius);
        solve_lsq(&LsqProblem { a: &a, b: &b, g_ineq: &gi, h_ineq: &hi }, DVector::zeros(self.dim)).x
    }
}

/// Stationarity residual of `g` for the problem at `target` with default
/// bounds: the max-norm of `grad I - lambda_e grad e - lambda_t grad t -
/// (bound terms)` after the best multiplier fit. Zero at exact KKT points.
pub fn kkt_residual(g: &BlockGraphon, target: DensityPair) -> f64 {
    kkt_residual_with_floor(g, target, SolverOptions::default().g_floor)
}

pub fn kkt_residual_with_floor(g: &BlockGraphon, target: DensityPair, g_floor: f64) -> f64 {
    let prob = Problem::new(g.n_blocks(), target, g_floor);
    let mut x = DVector::from_vec(g.to_decision());
    prob.clamp(&mut x);
    let ev = prob.eval(&x);
    prob.kkt(&x, &ev)
}

fn report(prob: &Problem, x: &DVector<f64>, ev: &Eval, iterations: usize, converged: bool, steps: Vec<(f64, f64)>) -> SolveReport {
    SolveReport {
        minimizer: ev.graphon.clone(),
        rate: ev.f,
        kkt_residual: prob.kkt(x, ev),
        constraint_violation: ev.violation(),
        iterations,
        converged,
        start_id: 0,
        merit_steps: steps,
    }
}

/// Local SQP solve from `x0`.
pub fn solve_local(x0: &BlockGraphon, target: DensityPair, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let n = x0.n_blocks();
    let prob = Problem::new(n, target, opts.g_floor);
    let dim = prob.dim;
    let mut x = DVector::from_vec(x0.to_decision());
    prob.clamp(&mut x);
    let mut ev = prob.eval(&x);
    let mut h = DMatrix::<f64>::identity(dim, dim);
    let mut h_is_identity = true;
    let mut rho = 1.0_f64;
    let mut radius = INITIAL_RADIUS;
    let mut skips = 0;
    let mut steps: Vec<(f64, f64)> = Vec::new();

    for iter in 0..=opts.max_iters {
        let viol = ev.violation();
        let kkt = prob.kkt(&x, &ev);
        if kkt <= opts.kkt_tol && viol <= opts.constraint_tol {
            return Ok(report(&prob, &x, &ev, iter, true, steps));
        }
        if iter == opts.max_iters {
            break;
        }

        let v = prob.restoration_step(&x, &ev.jac, &ev.r, radius);
        let jv = &ev.jac * &v;
        let (gi, hi) = prob.step_constraints(&x, radius);
        let sol = solve_qp(
            &QpProblem { h: &h, g: &ev.grad, a_eq: &ev.jac, b_eq: &jv, g_ineq: &gi, h_ineq: &hi },
            v.clone(),
        );
        let p = sol.x;
        let lam = sol.eq_mult;

        let r1 = ev.rnorm();
        let pred = r1 - (&ev.r + &ev.jac * &p).norm();
        if viol > 1e-6 && pred <= 1e-12 * r1 {
            // no linearized progress toward the constraints from here
            return Err(Error::InfeasibleStart { edge: target.edge, triangle: target.triangle });
        }

        if p.amax() <= opts.step_tol {
            if h_is_identity {
                break;
            }
            h = DMatrix::identity(dim, dim);
            h_is_identity = true;
            continue;
        }

        let gp = ev.grad.dot(&p);
        let quad = gp + 0.5 * (p.transpose() * &h * &p)[0];
        rho = rho.max(1.5 * lam.norm() + 1e-4);
        if pred > 0.0 && quad > 0.0 {
            rho = rho.max(quad / (0.9 * pred));
        }
        let phi0 = ev.f + rho * r1;
        let slope = gp - rho * pred;
        let noise = 4.0 * f64::EPSILON * (1.0 + phi0.abs());

        let mut accepted: Option<(DVector<f64>, Eval)> = None;
        let mut alpha = 1.0;
        while alpha >= 1e-10 {
            let mut xt = &x + alpha * &p;
            prob.clamp(&mut xt);
            let et = prob.eval(&xt);
            let phit = et.f + rho * et.rnorm();
            if phit <= phi0 + ARMIJO * alpha * slope.min(0.0) + noise {
                accepted = Some((xt, et));
                break;
            }
            if alpha == 1.0 {
                // second-order correction for the curvature of the constraints
                let q = prob.restoration_step(&xt, &ev.jac, &et.r, radius);
                let mut xs = &xt + q;
                prob.clamp(&mut xs);
                let es = prob.eval(&xs);
                if es.f + rho * es.rnorm() <= phi0 + ARMIJO * slope.min(0.0) + noise {
                    accepted = Some((xs, es));
                    break;
                }
            }
            alpha *= 0.5;
        }

        if accepted.is_some() {
            if alpha == 1.0 && p.amax() >= 0.9 * radius {
                radius = (2.0 * radius).min(MAX_RADIUS);
            } else if alpha < 1.0 {
                radius = (alpha * p.amax()).clamp(MIN_RADIUS, radius);
            }
        } else {
            radius = (0.25 * radius).max(MIN_RADIUS);
        }
        let Some((xn, en)) = accepted else {
            if h_is_identity {
                break;
            }
            h = DMatrix::identity(dim, dim);
            h_is_identity = true;
            continue;
        };

        let s = &xn - &x;
        let grad_l = |e: &Eval| &e.grad - e.jac.transpose() * &lam;
        let y = grad_l(&en) - grad_l(&ev);
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let hs = &h * &s;
            let shs = s.dot(&hs);
            if shs > 0.0 {
                h += &y * y.transpose() / sy - &hs * hs.transpose() / shs;
                h_is_identity = false;
            }
            skips = 0;
        } else {
            skips += 1;
            if skips >= opts.hessian_reset_threshold {
                h = DMatrix::identity(dim, dim);
                h_is_identity = true;
                skips = 0;
            }
        }
        steps.push((phi0, en.f + rho * en.rnorm()));
        x = xn;
        ev = en;
    }
    Ok(report(&prob, &x, &ev, opts.max_iters, false, steps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultistartConfig {
    pub l_c: usize,
    pub l_g: usize,
    pub dedup_tol: f64,
    /// Latin-hypercube subsample size when the full grid is larger.
    pub max_starts: usize,
    pub seed: u64,
}

impl Default for MultistartConfig {
    fn default() -> Self {
        Self { l_c: 10, l_g: 10, dedup_tol: 1e-5, max_starts: 10_000, seed: 0 }
    }
}

impl MultistartConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_c == 0 || self.l_g == 0 || self.max_starts == 0 || !(self.dedup_tol > 0.0) {
            return Err(Error::Config("l_c, l_g, max_starts and dedup_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Deduplicated results of a multistart run, sorted by rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartOutcome {
    /// One representative per class, with the canonical minimizer.
    pub classes: Vec<SolveReport>,
    /// Number of converged starts in each class.
    pub class_sizes: Vec<usize>,
    /// Candidate starts: grid points plus any random top-up draws.
    pub n_starts: usize,
    /// Candidates that could not be mapped onto the constraints.
    pub n_skipped: usize,
    pub n_converged: usize,
    /// Lowest-violation non-converged report, kept for diagnostics.
    pub best_unconverged: Option<SolveReport>,
}

impl MultistartOutcome {
    /// Global candidate `I_N`. Panics when no class converged, which
    /// [`multistart`] rules out.
    pub fn best(&self) -> &SolveReport {
        &self.classes[0]
    }
}

fn c_grid(n: usize, l_c: usize) -> Vec<Vec<f64>> {
    let levels: Vec<f64> = (0..l_c).map(|k| (k as f64 + 0.5) / l_c as f64).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n - 1];
    loop {
        let c: Vec<f64> = idx.iter().map(|&k| levels[k]).collect();
        let s: f64 = c.iter().sum();
        if s < 1.0 {
            let mut full = c;
            full.push(1.0 - s);
            out.push(full);
        }
        // odometer increment
        let mut d = 0;
        while d < idx.len() {
            idx[d] += 1;
            if idx[d] < l_c {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == idx.len() {
            break;
        }
    }
    out
}

/// Multistart initial guesses: the uniform grid over fractions and values,
/// or a Latin-hypercube subsample of it when it exceeds `max_starts`.
pub fn grid_starts(n: usize, ms: &MultistartConfig) -> Vec<BlockGraphon> {
    let cs = c_grid(n, ms.l_c);
    let m = n_upper(n);
    let level = |k: usize| (k as f64 + 0.5) / ms.l_g as f64;
    let g_count = (ms.l_g as f64).powi(m as i32);
    let full = cs.len() as f64 * g_count;
    let make = |c: &[f64], gi: &[usize]| {
        BlockGraphon::from_upper(c.to_vec(), gi.iter().map(|&k| level(k)).collect()).expect("grid point is valid")
    };

    if full <= ms.max_starts as f64 {
        let mut out = Vec::with_capacity(full as usize);
        for c in &cs {
            let mut gi = vec![0usize; m];
            loop {
                out.push(make(c, &gi));
                let mut d = 0;
                while d < m {
                    gi[d] += 1;
                    if gi[d] < ms.l_g {
                        break;
                    }
                    gi[d] = 0;
                    d += 1;
                }
                if d == m {
                    break;
                }
            }
        }
        return out;
    }

    let count = ms.max_starts;
    let mut rng = ChaCha8Rng::seed_from_u64(ms.seed);
    let mut strata = |levels: usize| -> Vec<usize> {
        let mut perm: Vec<usize> = (0..count).collect();
        perm.shuffle(&mut rng);
        perm.into_iter().map(|s| s * levels / count).collect()
    };
    let c_idx = strata(cs.len());
    let g_idx: Vec<Vec<usize>> = (0..m).map(|_| strata(ms.l_g)).collect();
    (0..count)
        .map(|s| {
            let gi: Vec<usize> = (0..m).map(|d| g_idx[d][s]).collect();
            make(&cs[c_idx[s]], &gi)
        })
        .collect()
}

/// Map a grid point onto the constraint set: the affine rescale if it
/// succeeds, otherwise the two-entry solve over entry pairs, keeping the
/// image closest to the grid point.
fn project_start(g: &BlockGraphon, target: DensityPair) -> Option<BlockGraphon> {
    if let Some(r) = rescale_affine(g, target) {
        return Some(r.graphon);
    }
    let m = n_upper(g.n_blocks());
    (0..m)
        .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
        .flat_map(|pair| rescale_rootfind(g, target, pair))
        .map(|h| (h.param_distance(g), h))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, h)| h)
}

/// Solve from every grid start and group the converged minimizers.
///
/// Each grid point is first mapped onto the constraint set. When fewer than
/// a handful survive, random draws mapped the same way are added; when none
/// do, the raw grid points are used and the solver restores feasibility.
pub fn multistart(n: usize, target: DensityPair, ms: &MultistartConfig, opts: &SolverOptions) -> Result<MultistartOutcome> {
    let out = multistart_outcome(n, target, ms, opts)?;
    if out.classes.is_empty() {
        return Err(Error::EmptyResult { edge: target.edge, triangle: target.triangle });
    }
    Ok(out)
}

/// [`multistart`] without the convergence requirement: `classes` may be
/// empty, with `best_unconverged` holding the closest failed run.
pub fn multistart_outcome(
    n: usize,
    target: DensityPair,
    ms: &MultistartConfig,
    opts: &SolverOptions,
) -> Result<MultistartOutcome> {
    if n == 0 {
        return Err(Error::Config("n_blocks must be at least 1".into()));
    }
    ms.validate()?;
    opts.validate()?;
    let raw = grid_starts(n, ms);
    let mut n_candidates = raw.len();
    let mut starts: Vec<(usize, BlockGraphon)> = raw
        .par_iter()
        .map(|g| project_start(g, target))
        .collect::<Vec<_>>()
        .into_iter()
        .enumerate()
        .filter_map(|(i, g)| g.map(|g| (i, g)))
        .collect();
    if starts.len() < MIN_PROJECTED_STARTS {
        // thin constraint sets: top up with random draws mapped the same way
        let offset = raw.len();
        let mut l = 0;
        while starts.len() < MIN_PROJECTED_STARTS && l < TOP_UP_DRAWS {
            let batch: Vec<(usize, BlockGraphon)> = (l..l + TOP_UP_BATCH)
                .into_par_iter()
                .filter_map(|k| {
                    let g = draw_raw(&mut sample_rng(ms.seed ^ TOP_UP_SEED, k as u64), n);
                    project_start(&g, target).map(|g| (offset + k, g))
                })
                .collect();
            starts.extend(batch);
            l += TOP_UP_BATCH;
        }
        n_candidates += l;
    }
    let mut n_skipped = n_candidates - starts.len();
    if starts.is_empty() {
        // nothing maps onto the constraints; let the solver restore feasibility
        n_skipped = 0;
        n_candidates = raw.len();
        starts = raw.into_iter().enumerate().collect();
    }

    let reports: Vec<SolveReport> = starts
        .par_iter()
        .filter_map(|(id, g)| {
            solve_local(g, target, opts).ok().map(|mut r| {
                r.start_id = *id;
                r
            })
        })
        .collect();

    let mut best_unconverged: Option<SolveReport> = None;
    let mut converged = Vec::new();
    for r in reports {
        if r.converged {
            converged.push(r);
        } else if best_unconverged
            .as_ref()
            .is_none_or(|b| (r.constraint_violation, r.rate) < (b.constraint_violation, b.rate))
        {
            best_unconverged = Some(r);
        }
    }
    let n_converged = converged.len();
    converged.sort_by(|a, b| a.rate.total_cmp(&b.rate).then(a.start_id.cmp(&b.start_id)));

    // classes are compared in the form reduced at the dedup tolerance, so that
    // nearly merged blocks do not split a class by block count
    let mut classes: Vec<SolveReport> = Vec::new();
    let mut keys: Vec<BlockGraphon> = Vec::new();
    let mut class_sizes: Vec<usize> = Vec::new();
    for mut r in converged {
        r.minimizer = r.minimizer.canonicalize(CANONICAL_TOL);
        let key = r.minimizer.canonicalize(ms.dedup_tol);
        match keys.iter().position(|k| k.param_distance(&key) <= ms.dedup_tol) {
            Some(k) => class_sizes[k] += 1,
            None => {
                classes.push(r);
                keys.push(key);
                class_sizes.push(1);
            }
        }
    }
    Ok(MultistartOutcome {
        classes,
        class_sizes,
        n_starts: n_candidates,
        n_skipped,
        n_converged,
        best_unconverged,
    })
}
