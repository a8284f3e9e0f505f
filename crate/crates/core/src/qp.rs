//! Dense convex quadratic programs by a primal active-set method.
//!
//! Solves `min g'x + x'Hx/2` subject to `A x = b` and `G x >= h` from a
//! feasible starting point. The working-set null space comes from an SVD,
//! so linearly dependent equality rows are tolerated. Objectives given as
//! `|A x - b|^2 / 2` are solved through `A` itself rather than `A'A`.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff when forming null spaces.
const RANK_TOL: f64 = 1e-10;

pub struct QpProblem<'a> {
    /// Symmetric positive definite.
    pub h: &'a DMatrix<f64>,
    pub g: &'a DVector<f64>,
    pub a_eq: &'a DMatrix<f64>,
    pub b_eq: &'a DVector<f64>,
    /// Rows of `G x >= h`.
    pub g_ineq: &'a DMatrix<f64>,
    pub h_ineq: &'a DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Multipliers with `g + Hx = A' eq + G' ineq`, `ineq >= 0`.
    pub eq_mult: DVector<f64>,
    pub ineq_mult: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Orthonormal basis of the null space of the rows of `c` (columns of the result).
pub fn null_space(c: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if c.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // pad to square so the SVD returns a full right basis
    let mut sq = DMatrix::zeros(n.max(c.nrows()), n);
    for (r, row) in c.row_iter().enumerate() {
        let norm = row.norm();
        if norm > 0.0 {
            sq.row_mut(r).copy_from(&(row / norm));
        }
    }
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max().max(1.0);
    let null_rows: Vec<usize> = (0..v_t.nrows())
        .filter(|&k| svd.singular_values[k] <= RANK_TOL * smax)
        .collect();
    let mut z = DMatrix::zeros(n, null_rows.len());
    for (col, &k) in null_rows.iter().enumerate() {
        z.set_column(col, &v_t.row(k).transpose());
    }
    z
}

/// Minimum-norm least-squares solution of `m y = rhs`.
pub fn lstsq(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    if m.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    svd.solve(rhs, eps).unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

/// `min |A x - b|^2 / 2` subject to `G x >= h`, for objectives whose
/// Hessian `A'A` is too ill-conditioned to factor directly.
pub struct LsqProblem<'a> {
    pub a: &'a DMatrix<f64>,
    pub b: &'a DVector<f64>,
    pub g_ineq: &'a DMatrix<f64>,
    pub h_ineq: &'a DVector<f64>,
}

enum Objective<'a> {
    Quadratic { h: &'a DMatrix<f64>, g: &'a DVector<f64> },
    LeastSquares { a: &'a DMatrix<f64>, b: &'a DVector<f64> },
}

impl Objective<'_> {
    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Quadratic { h, g } => *g + *h * x,
            Self::LeastSquares { a, b } => a.transpose() * (*a * x - *b),
        }
    }

    /// Minimizing step from `x` within the span of the columns of `z`.
    fn subspace_step(&self, z: &DMatrix<f64>, x: &DVector<f64>, grad: &DVector<f64>) -> DVector<f64> {
        let y = match self {
            Self::Quadratic { h, .. } => {
                let zhz = z.transpose() * *h * z;
                let rhs = -(z.transpose() * grad);
                match zhz.clone().cholesky() {
                    Some(ch) => ch.solve(&rhs),
                    None => lstsq(&zhz, &rhs),
                }
            }
            Self::LeastSquares { a, b } => lstsq(&(*a * z), &(*b - *a * x)),
        };
        z * y
    }
}

struct Constraints<'a> {
    a_eq: &'a DMatrix<f64>,
    g_ineq: &'a DMatrix<f64>,
    h_ineq: &'a DVector<f64>,
}

impl Constraints<'_> {
    fn working_matrix(&self, working: &[usize]) -> DMatrix<f64> {
        let m = self.a_eq.nrows();
        let mut c = DMatrix::zeros(m + working.len(), self.a_eq.ncols());
        for r in 0..m {
            c.set_row(r, &self.a_eq.row(r));
        }
        for (k, &i) in working.iter().enumerate() {
            c.set_row(m + k, &self.g_ineq.row(i));
        }
        c
    }
}

/// Solve the QP starting from the feasible point `x0`.
pub fn solve_qp(p: &QpProblem, x0: DVector<f64>) -> QpSolution {
    active_set(
        &Objective::Quadratic { h: p.h, g: p.g },
        &Constraints { a_eq: p.a_eq, g_ineq: p.g_ineq, h_ineq: p.h_ineq },
        x0,
    )
}

/// Solve the bounded least-squares problem starting from the feasible point `x0`.
pub fn solve_lsq(p: &LsqProblem, x0: DVector<f64>) -> QpSolution {
    let a_eq = DMatrix::zeros(0, p.a.ncols());
    active_set(
        &Objective::LeastSquares { a: p.a, b: p.b },
        &Constraints { a_eq: &a_eq, g_ineq: p.g_ineq, h_ineq: p.h_ineq },
        x0,
    )
}

fn active_set(obj: &Objective, cons: &Constraints, x0: DVector<f64>) -> QpSolution {
    let n = x0.len();
    let m = cons.a_eq.nrows();
    let k_rows = cons.g_ineq.nrows();
    let mut x = x0;
    let row_norm: Vec<f64> = (0..k_rows).map(|i| cons.g_ineq.row(i).norm().max(1e-300)).collect();
    let slack = |x: &DVector<f64>, i: usize| (cons.g_ineq.row(i) * x)[0] - cons.h_ineq[i];

    let mut working: Vec<usize> = (0..k_rows)
        .filter(|&i| slack(&x, i) <= 1e-13 * row_norm[i])
        .collect();
    let max_iter = 50 * (n + k_rows + 1);
    let finish = |x: DVector<f64>, working: &[usize], it: usize, converged: bool| {
        let lam = lstsq(&cons.working_matrix(working).transpose(), &obj.grad(&x));
        let mut ineq_mult = DVector::zeros(k_rows);
        for (k, &i) in working.iter().enumerate() {
            ineq_mult[i] = lam[m + k].max(0.0);
        }
        QpSolution { x, eq_mult: lam.rows(0, m).into_owned(), ineq_mult, iterations: it, converged }
    };
    // constraint dropped at the last stationary point
    let mut dropped: Option<usize> = None;
    // an unblocked full step lands on the minimizer over the working set
    let mut at_subspace_min = false;

    for it in 0..max_iter {
        let grad = obj.grad(&x);
        let c = cons.working_matrix(&working);
        let z = null_space(&c, n);
        let d = if z.ncols() == 0 || at_subspace_min {
            DVector::zeros(n)
        } else {
            obj.subspace_step(&z, &x, &grad)
        };

        let scale = 1.0 + x.amax();
        if d.amax() <= 1e-14 * scale {
            let lam = lstsq(&c.transpose(), &grad);
            let gscale = 1.0 + grad.amax();
            let worst = (0..working.len())
                .map(|k| (k, lam[m + k]))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                Some((k, v)) if v < -1e-12 * gscale => {
                    dropped = Some(working.remove(k));
                }
                _ => return finish(x, &working, it, true),
            }
            at_subspace_min = false;
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking = None;
        let dnorm = d.norm();
        for i in 0..k_rows {
            if working.contains(&i) {
                continue;
            }
            let ad = (cons.g_ineq.row(i) * &d)[0];
            if ad < -1e-15 * row_norm[i] * dnorm {
                let step = (-slack(&x, i) / ad).max(0.0);
                if step < alpha {
                    alpha = step;
                    blocking = Some(i);
                }
            }
        }
        if alpha == 0.0 && blocking.is_some() && blocking == dropped {
            // rounding sends the step back through the constraint just released
            working.push(blocking.unwrap_or_default());
            return finish(x, &working, it, false);
        }
        x += alpha * d;
        match blocking {
            Some(i) => working.push(i),
            None => at_subspace_min = true,
        }
        dropped = None;
    }
    finish(x, &working, max_iter, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(n: usize) -> (DMatrix<f64>, DVector<f64>) {
        (DMatrix::zeros(0, n), DVector::zeros(0))
    }

    #[test]
    fn unconstrained_minimum() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let g = DVector::from_vec(vec![-2.0, -4.0]);
        let (a, b) = empty(2);
        let (gi, hi) = empty(2);
        let s = solve_qp(&QpProblem { h: &h, g: &g, a_eq: &a, b_eq: &b, g_ineq: &gi, h_ineq: &hi }, DVector::zeros(2));
        assert!(s.converged);
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] - 1.0).abs() < 1e-14);
    }

    /// min (x-2)^2 + (y-2)^2, x + y = 1, x >= 0.8: solution (0.8, 0.2).
    /// Oracle: 1-D parameterization y = 1 - x, minimizer x = 0.5 clipped to 0.8.
    #[test]
    fn equality_and_active_bound() {
        let h = DMatrix::identity(2, 2) * 2.0;
        let g = DVector::from_vec(vec![-4.0, -4.0]);
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0]);
        let gi = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let hi = DVector::from_vec(vec![0.8]);
        let s = solve_qp(&QpProblem { h: &h, g: &g, a_eq: &a, b_eq: &b, g_ineq: &gi, h_ineq: &hi }, DVector::from_vec(vec![0.9, 0.1]));
        assert!(s.converged);
        assert!((s.x[0] - 0.8).abs() < 1e-13 && (s.x[1] - 0.2).abs() < 1e-13);
        assert!(s.ineq_mult[0] > 0.0);
        // stationarity g + Hx = A'eq + G'ineq
        let r = &g + &h * &s.x - a.transpose() * &s.eq_mult - gi.transpose() * &s.ineq_mult;
        assert!(r.amax() < 1e-12);
    }

    #[test]
    fn dependent_equalities_are_tolerated() {
        let h = DMatrix::identity(3, 3);
        let g = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        let b = DVector::from_vec(vec![0.0, 0.0]);
        let (gi, hi) = empty(3);
        let s = solve_qp(&QpProblem { h: &h, g: &g, a_eq: &a, b_eq: &b, g_ineq: &gi, h_ineq: &hi }, DVector::zeros(3));
        assert!(s.converged);
        // projection of -g onto sum(x) = 0
        let mean = (-1.0 + 1.0 - 0.5) / 3.0;
        for (xi, gi) in s.x.iter().zip(g.iter()) {
            assert!((xi - (-gi - mean)).abs() < 1e-13);
        }
    }

    /// Random bound-constrained QPs against a brute-force vertex/face oracle
    /// in two dimensions: enumerate all candidate active sets.
    #[test]
    fn box_qp_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let l = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let h = &l * l.transpose() + DMatrix::identity(2, 2) * 0.1;
            let g = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let gi = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]);
            let hi = DVector::from_vec(vec![-1.0, -1.0, -1.0, -1.0]);
            let (a, b) = empty(2);
            let s = solve_qp(&QpProblem { h: &h, g: &g, a_eq: &a, b_eq: &b, g_ineq: &gi, h_ineq: &hi }, DVector::zeros(2));
            let f = |x: &DVector<f64>| (g.transpose() * x)[0] + 0.5 * (x.transpose() * &h * x)[0];
            let mut best = f64::INFINITY;
            let k = 400;
            for i in 0..=k {
                for j in 0..=k {
                    let x = DVector::from_vec(vec![-1.0 + 2.0 * i as f64 / k as f64, -1.0 + 2.0 * j as f64 / k as f64]);
                    best = best.min(f(&x));
                }
            }
            assert!(s.converged);
            assert!(f(&s.x) <= best + 1e-12);
            assert!(s.x.amax() <= 1.0 + 1e-14);
        }
    }

    /// Bounded least squares against the same grid oracle.
    #[test]
    fn box_lsq_matches_grid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let gi = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]);
        let hi = DVector::from_vec(vec![-1.0, -1.0, -1.0, -1.0]);
        for _ in 0..100 {
            let a = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-1.0..1.0));
            let b = DVector::from_fn(3, |_, _| rng.random_range(-3.0..3.0));
            let s = solve_lsq(&LsqProblem { a: &a, b: &b, g_ineq: &gi, h_ineq: &hi }, DVector::zeros(2));
            let f = |x: &DVector<f64>| 0.5 * (&a * x - &b).norm_squared();
            let k = 400;
            let mut best = f64::INFINITY;
            for i in 0..=k {
                for j in 0..=k {
                    let x = DVector::from_vec(vec![-1.0 + 2.0 * i as f64 / k as f64, -1.0 + 2.0 * j as f64 / k as f64]);
                    best = best.min(f(&x));
                }
            }
            assert!(s.converged);
            assert!(f(&s.x) <= best + 1e-12);
        }
    }

    /// Two informative rows plus a tiny ridge: the stacked form keeps the
    /// projected gradient at the solution near zero where the normal
    /// equations would lose most of their digits.
    #[test]
    fn ill_conditioned_lsq_reaches_optimality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = 12;
        for _ in 0..50 {
            let mut a = DMatrix::zeros(2 + n, n);
            for j in 0..n {
                a[(0, j)] = rng.random_range(-1.0..1.0);
                a[(1, j)] = rng.random_range(-1.0..1.0);
                a[(2 + j, j)] = 1e-7;
            }
            let mut b = DVector::zeros(2 + n);
            b[0] = rng.random_range(-0.5..0.5);
            b[1] = rng.random_range(-0.5..0.5);
            let radius = rng.random_range(0.01..0.2);
            let mut gi = DMatrix::zeros(2 * n, n);
            for j in 0..n {
                gi[(2 * j, j)] = 1.0;
                gi[(2 * j + 1, j)] = -1.0;
            }
            let hi = DVector::from_element(2 * n, -radius);
            let s = solve_lsq(&LsqProblem { a: &a, b: &b, g_ineq: &gi, h_ineq: &hi }, DVector::zeros(n));
            assert!(s.iterations < 10 * n, "{} iterations", s.iterations);
            let grad = a.transpose() * (&a * &s.x - &b);
            for j in 0..n {
                let x = s.x[j];
                assert!(x.abs() <= radius + 1e-15);
                // free coordinates have zero gradient, bound ones point outward
                if x.abs() < radius - 1e-12 {
                    assert!(grad[j].abs() < 1e-9, "free gradient {}", grad[j]);
                } else {
                    assert!(grad[j] * x.signum() <= 1e-9, "bound gradient {}", grad[j]);
                }
            }
        }
    }
}
