//! N-block step graphons and the functionals evaluated on them.
//!
//! A [`BlockGraphon`] is constant on the product cells of a partition of
//! `[0, 1]` into `N` intervals of lengths `c_i`. Only the upper triangle of
//! the value matrix is stored, so symmetry holds by construction.
//!
//! Solvers work in *decision coordinates*: the first `N - 1` fractions
//! (the last one is `1 - sum`) followed by the packed upper triangle of
//! `g`. Gradients are returned in those coordinates, which means an
//! off-diagonal entry carries the factor 2 from appearing as both `g_ij`
//! and `g_ji`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `-(ln 2) / 2`, the global minimum of the rate function.
pub const MIN_RATE: f64 = -0.346_573_590_279_972_65;

/// Default tolerance for dropping and merging blocks.
pub const CANONICAL_TOL: f64 = 1e-7;

const SUM_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

/// Target point `(edge, triangle)` in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPair {
    pub edge: f64,
    pub triangle: f64,
}

impl DensityPair {
    pub fn new(edge: f64, triangle: f64) -> Result<Self> {
        for (what, v) in [("edge density", edge), ("triangle density", triangle)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange { what, value: v });
            }
        }
        Ok(Self { edge, triangle })
    }
}

/// Value of the rate function together with the entropy `s = -I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateValue {
    pub rate: f64,
    pub entropy: f64,
}

impl RateValue {
    pub fn from_rate(rate: f64) -> Self {
        Self {
            rate,
            entropy: -rate,
        }
    }
}

/// `I_0(u) = (u ln u + (1 - u) ln(1 - u)) / 2`, extended by continuity to `0` at the endpoints.
pub fn i0(u: f64) -> f64 {
    0.5 * (xlogx(u) + xlogx(1.0 - u))
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `I_0'(u) = ln(u / (1 - u)) / 2`.
pub fn i0_d1(u: f64) -> Result<f64> {
    check_open_unit("I0'", u)?;
    Ok(0.5 * (u / (1.0 - u)).ln())
}

/// `I_0''(u) = 1 / (2 u (1 - u))`.
pub fn i0_d2(u: f64) -> Result<f64> {
    check_open_unit("I0''", u)?;
    Ok(0.5 / (u * (1.0 - u)))
}

fn check_open_unit(what: &'static str, u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value: u })
    }
}

/// Sum that does not depend on the order of `terms`: sort, then accumulate
/// with Neumaier compensation.
fn ordered_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for &x in terms.iter() {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn product3(mut a: [f64; 3]) -> f64 {
    a.sort_unstable_by(f64::total_cmp);
    a[0] * a[1] * a[2]
}

/// Number of packed upper-triangle entries for `n` blocks.
pub fn n_upper(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Length of the decision vector for `n` blocks.
pub fn decision_len(n: usize) -> usize {
    n - 1 + n_upper(n)
}

#[inline]
fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i + 1) / 2 + (j - i)
}

/// Iterate `(i, j)` pairs of the packed upper triangle in storage order.
pub fn upper_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)))
}

/// Step graphon on `N` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphonJson", into = "GraphonJson")]
pub struct BlockGraphon {
    fractions: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GraphonJson {
    c: Vec<f64>,
    g: Vec<Vec<f64>>,
}

impl TryFrom<GraphonJson> for BlockGraphon {
    type Error = Error;

    fn try_from(j: GraphonJson) -> Result<Self> {
        BlockGraphon::new(j.c, j.g)
    }
}

impl From<BlockGraphon> for GraphonJson {
    fn from(g: BlockGraphon) -> Self {
        GraphonJson {
            g: g.matrix(),
            c: g.fractions,
        }
    }
}

impl BlockGraphon {
    /// Build from fractions and a full symmetric matrix.
    pub fn new(fractions: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = fractions.len();
        if values.len() != n || values.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGraphon(format!(
                "value matrix must be {n}x{n}"
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if (values[i][j] - values[j][i]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidGraphon(format!(
                        "asymmetric entries g[{i}][{j}]={} and g[{j}][{i}]={}",
                        values[i][j], values[j][i]
                    )));
                }
            }
        }
        let upper = upper_pairs(n).map(|(i, j)| values[i][j]).collect();
        Self::from_upper(fractions, upper)
    }

    /// Build from fractions and the packed upper triangle (row-major, `i <= j`).
    pub fn from_upper(fractions: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = fractions.len();
        if n == 0 {
            return Err(Error::InvalidGraphon("at least one block required".into()));
        }
        if upper.len() != n_upper(n) {
            return Err(Error::InvalidGraphon(format!(
                "expected {} upper-triangle values, got {}",
                n_upper(n),
                upper.len()
            )));
        }
        if let Some(&c) = fractions.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidGraphon(format!("negative block fraction {c}")));
        }
        let mut sum: Vec<f64> = fractions.clone();
        let total = ordered_sum(&mut sum);
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidGraphon(format!(
                "block fractions sum to {total}"
            )));
        }
        if let Some(&v) = upper.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidGraphon(format!("value {v} outside [0, 1]")));
        }
        Ok(Self { fractions, upper })
    }

    /// Constant graphon `g = value` on `n` equal blocks.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::from_upper(vec![1.0 / n as f64; n], vec![value; n_upper(n)])
    }

    /// Inverse of [`BlockGraphon::to_decision`].
    pub fn from_decision(n: usize, x: &[f64]) -> Result<Self> {
        if x.len() != decision_len(n) {
            return Err(Error::InvalidGraphon(format!(
                "decision vector has length {}, expected {}",
                x.len(),
                decision_len(n)
            )));
        }
        let mut fractions = x[..n - 1].to_vec();
        let mut head = fractions.clone();
        let last = 1.0 - ordered_sum(&mut head);
        fractions.push(last);
        Self::from_upper(fractions, x[n - 1..].to_vec())
    }

    /// Reduced fractions `c_1..c_{N-1}` followed by the packed upper triangle.
    pub fn to_decision(&self) -> Vec<f64> {
        let n = self.n_blocks();
        let mut x = Vec::with_capacity(decision_len(n));
        x.extend_from_slice(&self.fractions[..n - 1]);
        x.extend_from_slice(&self.upper);
        x
    }

    pub fn n_blocks(&self) -> usize {
        self.fractions.len()
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    /// Packed upper triangle in storage order, see [`upper_pairs`].
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.upper[upper_index(self.n_blocks(), i, j)]
    }

    /// Full symmetric value matrix.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n_blocks();
        (0..n)
            .map(|i| (0..n).map(|j| self.value(i, j)).collect())
            .collect()
    }

    /// Relabel blocks: block `k` of the result is block `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_blocks();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidGraphon(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        let fractions = perm.iter().map(|&p| self.fractions[p]).collect();
        let upper = upper_pairs(n)
            .map(|(i, j)| self.value(perm[i], perm[j]))
            .collect();
        Ok(Self { fractions, upper })
    }

    /// `e(g) = sum_ij g_ij c_i c_j`.
    pub fn edge_density(&self) -> f64 {
        let (c, n) = (&self.fractions, self.n_blocks());
        let mut terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                terms.push(self.value(i, j) * (c[i] * c[j]));
            }
        }
        ordered_sum(&mut terms)
    }

    /// `t(g) = sum_ijk g_ij g_jk g_ki c_i c_j c_k`.
    pub fn triangle_density(&self) -> f64 {
        let (c, n) = (&self.fractions, self.n_blocks());
        let g = self.matrix();
        let mut terms = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    terms.push(
                        product3([g[i][j], g[j][k], g[k][i]]) * product3([c[i], c[j], c[k]]),
                    );
                }
            }
        }
        ordered_sum(&mut terms)
    }

    /// `I(g) = sum_ij I_0(g_ij) c_i c_j`.
    pub fn rate(&self) -> RateValue {
        let (c, n) = (&self.fractions, self.n_blocks());
        let mut terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                terms.push(i0(self.value(i, j)) * (c[i] * c[j]));
            }
        }
        RateValue::from_rate(ordered_sum(&mut terms))
    }

    /// Gradient of `I` in decision coordinates. Fails when a value sits on `{0, 1}`.
    pub fn grad_rate(&self) -> Result<Gradient> {
        let (c, n) = (&self.fractions, self.n_blocks());
        let mut dg = Vec::with_capacity(n_upper(n));
        for (i, j) in upper_pairs(n) {
            let mult = if i == j { 1.0 } else { 2.0 };
            dg.push(mult * i0_d1(self.value(i, j))? * c[i] * c[j]);
        }
        let full: Vec<f64> = (0..n)
            .map(|i| 2.0 * (0..n).map(|j| i0(self.value(i, j)) * c[j]).sum::<f64>())
            .collect();
        Ok(Gradient {
            dc: reduce_fraction_gradient(&full),
            dg,
        })
    }

    /// Gradient of `e` in decision coordinates.
    pub fn grad_edge(&self) -> Gradient {
        let (c, n) = (&self.fractions, self.n_blocks());
        let dg = upper_pairs(n)
            .map(|(i, j)| if i == j { c[i] * c[i] } else { 2.0 * c[i] * c[j] })
            .collect();
        let full: Vec<f64> = (0..n)
            .map(|i| 2.0 * (0..n).map(|j| self.value(i, j) * c[j]).sum::<f64>())
            .collect();
        Gradient {
            dc: reduce_fraction_gradient(&full),
            dg,
        }
    }

    /// Gradient of `t` in decision coordinates.
    pub fn grad_triangle(&self) -> Gradient {
        let (c, n) = (&self.fractions, self.n_blocks());
        let g = self.matrix();
        // w[i][j] = sum_k g_jk g_ki c_k
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                w[i][j] = (0..n).map(|k| g[j][k] * g[k][i] * c[k]).sum();
            }
        }
        let dg = upper_pairs(n)
            .map(|(i, j)| {
                let mult = if i == j { 3.0 } else { 6.0 };
                mult * w[i][j] * c[i] * c[j]
            })
            .collect();
        let full: Vec<f64> = (0..n)
            .map(|i| 3.0 * (0..n).map(|j| g[i][j] * w[i][j] * c[j]).sum::<f64>())
            .collect();
        Gradient {
            dc: reduce_fraction_gradient(&full),
            dg,
        }
    }

    /// Jacobian rows `(grad e, grad t)` in decision coordinates.
    pub fn grad_constraints(&self) -> (Gradient, Gradient) {
        (self.grad_edge(), self.grad_triangle())
    }

    /// Diagonal of the second variation of `I` in the g-entries, one value per
    /// matrix entry: `c_i c_j / (2 g_ij (1 - g_ij))`. In decision coordinates
    /// the off-diagonal entries are doubled.
    pub fn hessian_rate_gg(&self) -> Result<Vec<Vec<f64>>> {
        let (c, n) = (&self.fractions, self.n_blocks());
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                h[i][j] = i0_d2(self.value(i, j))? * c[i] * c[j];
            }
        }
        Ok(h)
    }

    /// Reduced representative: blocks with `c_i < tol` are dropped, blocks
    /// whose rows agree within `tol` are merged, and the rest are sorted by
    /// descending fraction (then descending diagonal value).
    pub fn canonicalize(&self, tol: f64) -> BlockGraphon {
        let n = self.n_blocks();
        let mut keep: Vec<usize> = (0..n).filter(|&i| self.fractions[i] >= tol).collect();
        if keep.is_empty() {
            // every block is negligible; keep the largest
            let best = (0..n)
                .max_by(|&a, &b| self.fractions[a].total_cmp(&self.fractions[b]))
                .unwrap_or(0);
            keep.push(best);
        }
        let mut c: Vec<f64> = keep.iter().map(|&i| self.fractions[i]).collect();
        let mut g: Vec<Vec<f64>> = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| self.value(i, j)).collect())
            .collect();
        let total: f64 = ordered_sum(&mut c.clone());
        c.iter_mut().for_each(|x| *x /= total);

        'merge: loop {
            let m = c.len();
            for a in 0..m {
                for b in a + 1..m {
                    if (0..m).all(|k| (g[a][k] - g[b][k]).abs() < tol) {
                        merge_blocks(&mut c, &mut g, a, b);
                        continue 'merge;
                    }
                }
            }
            break;
        }

        let m = c.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            c[b].total_cmp(&c[a])
                .then(g[b][b].total_cmp(&g[a][a]))
                .then_with(|| {
                    let mut ra = g[a].clone();
                    let mut rb = g[b].clone();
                    ra.sort_unstable_by(f64::total_cmp);
                    rb.sort_unstable_by(f64::total_cmp);
                    cmp_slices(&rb, &ra)
                })
        });
        let fractions = order.iter().map(|&i| c[i]).collect();
        let upper = upper_pairs(m)
            .map(|(i, j)| g[order[i]][order[j]].clamp(0.0, 1.0))
            .collect();
        BlockGraphon { fractions, upper }
    }

    /// Split block `block` into two halves carrying identical values.
    pub fn refine(&self, block: usize) -> Result<BlockGraphon> {
        let n = self.n_blocks();
        if block >= n {
            return Err(Error::BlockIndex { index: block, n_blocks: n });
        }
        // source[k] is the original block behind new block k
        let source: Vec<usize> = (0..=n)
            .map(|k| if k <= block { k } else { k - 1 })
            .collect();
        let fractions = (0..=n)
            .map(|k| {
                let f = self.fractions[source[k]];
                if source[k] == block { 0.5 * f } else { f }
            })
            .collect();
        let upper = upper_pairs(n + 1)
            .map(|(i, j)| self.value(source[i], source[j]))
            .collect();
        Ok(BlockGraphon { fractions, upper })
    }

    /// Smallest, over block relabelings, max-norm distance between the
    /// parameters `(c, g)` of two graphons with the same block count.
    /// Returns infinity when the block counts differ.
    pub fn param_distance(&self, other: &BlockGraphon) -> f64 {
        let n = self.n_blocks();
        if n != other.n_blocks() {
            return f64::INFINITY;
        }
        let direct = |perm: &[usize]| -> f64 {
            let mut d = 0.0_f64;
            for i in 0..n {
                d = d.max((self.fractions[i] - other.fractions[perm[i]]).abs());
                for j in i..n {
                    d = d.max((self.value(i, j) - other.value(perm[i], perm[j])).abs());
                }
            }
            d
        };
        if n > 6 {
            return direct(&(0..n).collect::<Vec<_>>());
        }
        let mut best = f64::INFINITY;
        let mut perm: Vec<usize> = (0..n).collect();
        for_each_permutation(&mut perm, 0, &mut |p| best = best.min(direct(p)));
        best
    }
}

fn cmp_slices(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

fn for_each_permutation(perm: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        for_each_permutation(perm, k + 1, f);
        perm.swap(k, i);
    }
}

/// Merge block `b` into block `a` with fraction-weighted averages, which
/// keeps the edge density exact.
fn merge_blocks(c: &mut Vec<f64>, g: &mut Vec<Vec<f64>>, a: usize, b: usize) {
    let (ca, cb) = (c[a], c[b]);
    let w = ca + cb;
    let m = c.len();
    let diag = if w > 0.0 {
        (ca * ca * g[a][a] + 2.0 * ca * cb * g[a][b] + cb * cb * g[b][b]) / (w * w)
    } else {
        g[a][a]
    };
    for k in 0..m {
        if k == a || k == b {
            continue;
        }
        let v = if w > 0.0 {
            (ca * g[a][k] + cb * g[b][k]) / w
        } else {
            g[a][k]
        };
        g[a][k] = v;
        g[k][a] = v;
    }
    g[a][a] = diag;
    c[a] = w;
    c.remove(b);
    g.remove(b);
    for row in g.iter_mut() {
        row.remove(b);
    }
}

/// Full-fraction gradient to reduced coordinates, `c_N = 1 - sum_{p<N} c_p`.
fn reduce_fraction_gradient(full: &[f64]) -> Vec<f64> {
    let last = full[full.len() - 1];
    full[..full.len() - 1].iter().map(|d| d - last).collect()
}

/// Gradient in decision coordinates: reduced fractions, then packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub dc: Vec<f64>,
    pub dg: Vec<f64>,
}

impl Gradient {
    /// Derivative with respect to the single matrix entry `g_ij`
    /// (half the decision-coordinate derivative when `i != j`).
    pub fn entry(&self, n: usize, i: usize, j: usize) -> f64 {
        let d = self.dg[upper_index(n, i, j)];
        if i == j { d } else { 0.5 * d }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.dc.clone();
        v.extend_from_slice(&self.dg);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample() -> BlockGraphon {
        BlockGraphon::new(vec![0.3, 0.7], vec![vec![0.2, 0.6], vec![0.6, 0.4]]).unwrap()
    }

    #[test]
    fn edge_density_examples() {
        assert_eq!(BlockGraphon::constant(3, 0.5).unwrap().edge_density(), 0.5);
        let e = 0.36_f64;
        let clique = BlockGraphon::from_upper(vec![e.sqrt(), 1.0 - e.sqrt()], vec![1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(clique.edge_density(), 0.36, epsilon = 1e-15);
        assert_relative_eq!(sample().edge_density(), 0.466, epsilon = 1e-15);
    }

    #[test]
    fn triangle_density_examples() {
        let g = BlockGraphon::constant(3, 0.3).unwrap();
        assert_relative_eq!(g.triangle_density(), 0.027, epsilon = 1e-15);

        let (e, tau) = (0.4_f64, 0.05_f64);
        let delta = (e.powi(3) - tau).cbrt();
        let sym = BlockGraphon::from_upper(vec![0.5, 0.5], vec![e - delta, e + delta, e - delta]).unwrap();
        assert_relative_eq!(sym.triangle_density(), tau, epsilon = 1e-15);

        // brute force over all (i, j, k) on the full matrix
        let g = sample();
        let (c, m) = (g.fractions(), g.matrix());
        let mut brute = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    brute += m[i][j] * m[j][k] * m[k][i] * c[i] * c[j] * c[k];
                }
            }
        }
        assert_relative_eq!(g.triangle_density(), brute, epsilon = 1e-15);
    }

    #[test]
    fn rate_examples() {
        let half = BlockGraphon::constant(2, 0.5).unwrap();
        assert_relative_eq!(half.rate().rate, -0.34657359027997, epsilon = 1e-14);
        assert_eq!(half.rate().entropy, -half.rate().rate);

        let e = 0.25_f64;
        let clique = BlockGraphon::from_upper(vec![e.sqrt(), 1.0 - e.sqrt()], vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(clique.rate().rate, 0.0);

        let direct = 0.09 * i0(0.2) + 2.0 * 0.21 * i0(0.6) + 0.49 * i0(0.4);
        assert_relative_eq!(sample().rate().rate, direct, epsilon = 1e-15);
    }

    #[test]
    fn i0_values() {
        assert_relative_eq!(i0(0.5), -std::f64::consts::LN_2 / 2.0, epsilon = 1e-16);
        assert_eq!(i0(0.0), 0.0);
        assert_eq!(i0(1.0), 0.0);
        assert_eq!(i0_d1(0.5).unwrap(), 0.0);
        assert_eq!(i0_d2(0.5).unwrap(), 2.0);
        let direct = 0.5 * (0.3 * 0.3_f64.ln() + 0.7 * 0.7_f64.ln());
        assert_relative_eq!(i0(0.3), direct, epsilon = 1e-16);
        assert_relative_eq!(i0(0.3), -0.305_432_151_027_446_75, epsilon = 1e-15);
        assert!(matches!(i0_d1(0.0), Err(Error::Domain { .. })));
        assert!(matches!(i0_d2(1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn gradient_vanishes_at_half() {
        let g = BlockGraphon::from_upper(vec![0.2, 0.3, 0.5], vec![0.5; 6]).unwrap();
        let grad = g.grad_rate().unwrap();
        assert!(grad.to_vec().iter().all(|d| d.abs() < 1e-16));
    }

    #[test]
    fn gradient_rejects_boundary_values() {
        let g = BlockGraphon::from_upper(vec![0.5, 0.5], vec![1.0, 0.2, 0.3]).unwrap();
        assert!(matches!(g.grad_rate(), Err(Error::Domain { .. })));
        assert!(g.hessian_rate_gg().is_err());
    }

    #[test]
    fn constraint_gradient_on_constant_graphon() {
        let eps = 0.35;
        let g = BlockGraphon::from_upper(vec![0.2, 0.8], vec![eps; 3]).unwrap();
        let (ge, gt) = g.grad_constraints();
        let c = g.fractions();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(ge.entry(2, i, j), c[i] * c[j], epsilon = 1e-15);
                assert_relative_eq!(gt.entry(2, i, j), 3.0 * eps * eps * c[i] * c[j], epsilon = 1e-15);
            }
        }
        assert!(ge.dc.iter().chain(&gt.dc).all(|d| d.abs() < 1e-15));
    }

    #[test]
    fn hessian_at_half() {
        let g = BlockGraphon::constant(2, 0.5).unwrap();
        let h = g.hessian_rate_gg().unwrap();
        for row in &h {
            for &v in row {
                assert_relative_eq!(v, 2.0 * 0.25, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn canonicalize_examples() {
        let c = BlockGraphon::from_upper(vec![0.1, 0.2, 0.3, 0.4], vec![0.37; 10]).unwrap();
        let canon = c.canonicalize(CANONICAL_TOL);
        assert_eq!(canon.n_blocks(), 1);
        assert_relative_eq!(canon.fractions()[0], 1.0, epsilon = 1e-15);

        let a = BlockGraphon::from_upper(vec![0.7, 0.3], vec![0.2, 0.6, 0.4]).unwrap();
        let b = BlockGraphon::from_upper(vec![0.3, 0.7], vec![0.4, 0.6, 0.2]).unwrap();
        assert_eq!(a.canonicalize(CANONICAL_TOL), b.canonicalize(CANONICAL_TOL));

        let three = BlockGraphon::new(
            vec![0.2, 0.3, 0.5],
            vec![
                vec![0.1, 0.1, 0.7],
                vec![0.1, 0.1, 0.7],
                vec![0.7, 0.7, 0.3],
            ],
        )
        .unwrap();
        let merged = three.canonicalize(CANONICAL_TOL);
        assert_eq!(merged.n_blocks(), 2);
        assert_relative_eq!(merged.edge_density(), three.edge_density(), epsilon = 1e-12);
        assert_relative_eq!(merged.triangle_density(), three.triangle_density(), epsilon = 1e-12);
        assert_relative_eq!(merged.rate().rate, three.rate().rate, epsilon = 1e-12);
    }

    #[test]
    fn canonicalize_drops_empty_blocks() {
        let g = BlockGraphon::from_upper(vec![0.6, 0.0, 0.4], vec![0.2, 0.9, 0.5, 0.1, 0.3, 0.8]).unwrap();
        let canon = g.canonicalize(CANONICAL_TOL);
        assert_eq!(canon.n_blocks(), 2);
        assert_relative_eq!(canon.rate().rate, g.rate().rate, epsilon = 1e-15);
    }

    #[test]
    fn refine_examples() {
        let g = BlockGraphon::constant(1, 0.3).unwrap();
        let r = g.refine(0).unwrap();
        assert_eq!(r.fractions(), &[0.5, 0.5]);
        assert_eq!(r.upper(), &[0.3, 0.3, 0.3]);
        assert_eq!(r.rate(), g.rate());
        assert!(matches!(g.refine(1), Err(Error::BlockIndex { .. })));

        let sym = BlockGraphon::from_upper(vec![0.5, 0.5], vec![0.11, 0.69, 0.11]).unwrap();
        let r = sym.refine(1).unwrap();
        assert_eq!(r.n_blocks(), 3);
        assert_relative_eq!(r.triangle_density(), sym.triangle_density(), epsilon = 1e-15);
    }

    #[test]
    fn decision_round_trip() {
        let g = BlockGraphon::from_upper(vec![0.25, 0.25, 0.5], vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let x = g.to_decision();
        assert_eq!(x.len(), decision_len(3));
        assert_eq!(BlockGraphon::from_decision(3, &x).unwrap(), g);
    }

    #[test]
    fn json_schema() {
        let g = sample();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"c":[0.3,0.7],"g":[[0.2,0.6],[0.6,0.4]]}"#);
        let back: BlockGraphon = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let asym = r#"{"c":[0.5,0.5],"g":[[0.2,0.6],[0.6000001,0.4]]}"#;
        assert!(serde_json::from_str::<BlockGraphon>(asym).is_err());
        let tiny = r#"{"c":[0.5,0.5],"g":[[0.2,0.6],[0.6000000000001,0.4]]}"#;
        assert!(serde_json::from_str::<BlockGraphon>(tiny).is_ok());
    }

    #[test]
    fn validation() {
        assert!(BlockGraphon::from_upper(vec![0.5, 0.6], vec![0.1; 3]).is_err());
        assert!(BlockGraphon::from_upper(vec![0.5, 0.5], vec![0.1, 1.2, 0.1]).is_err());
        assert!(BlockGraphon::from_upper(vec![1.5, -0.5], vec![0.1; 3]).is_err());
        assert!(DensityPair::new(0.5, 1.1).is_err());
    }

    #[test]
    fn param_distance_ignores_labels() {
        let a = BlockGraphon::from_upper(vec![0.7, 0.3], vec![0.2, 0.6, 0.4]).unwrap();
        let b = a.permuted(&[1, 0]).unwrap();
        assert_eq!(a.param_distance(&b), 0.0);
        let c = BlockGraphon::constant(3, 0.2).unwrap();
        assert_eq!(a.param_distance(&c), f64::INFINITY);
    }
}
