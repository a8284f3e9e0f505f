//! Boundary curves, the perturbative bipodal family and phase classification.
//!
//! The bipodal family around the ER graphon `e |1><1|` is
//! `g = e |1><1| + mu/sqrt2 (|psi><1| + |1><psi|) + nu |psi><psi|` with
//! `psi` taking the two values `sqrt((1-c)/c)` on `[0, c)` and
//! `-sqrt(c/(1-c))` on `[c, 1]`. In the orthonormal pair `(1, psi)` it acts
//! as the 2x2 matrix `[[e, mu/sqrt2], [mu/sqrt2, nu]]`, so its triangle
//! density is the trace of that matrix cubed.
//!
//! Below the ER curve the symmetric member (`c = 1/2`, `mu = 0`) is stable
//! against changes of `c` while the discriminant `B^2 - 4AC` of the second
//! `c`-derivative of `I` is negative.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::graphon::{i0, i0_d1, i0_d2, BlockGraphon, DensityPair};
use crate::poly::bisect;

/// Default distance to a curve below which a point is labelled `Boundary`.
pub const CLASSIFY_TOL: f64 = 1e-6;

const SCAN_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub eps: f64,
    pub c: f64,
    pub mu: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCoeffs {
    pub a: f64,
    pub b: f64,
    pub c_coef: f64,
    pub discriminant: f64,
    pub mu_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    PhaseI,
    PhaseII,
    PhaseIII,
    ErCurve,
    Boundary,
    Infeasible,
    Unknown,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PhaseI => "I",
            Self::PhaseII => "II",
            Self::PhaseIII => "III",
            Self::ErCurve => "ER",
            Self::Boundary => "boundary",
            Self::Infeasible => "infeasible",
            Self::Unknown => "unknown",
        }
    }
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PhaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "I" => Self::PhaseI,
            "II" => Self::PhaseII,
            "III" => Self::PhaseIII,
            "ER" => Self::ErCurve,
            "boundary" => Self::Boundary,
            "infeasible" => Self::Infeasible,
            "unknown" => Self::Unknown,
            other => return Err(Error::Config(format!("unknown phase label {other:?}"))),
        })
    }
}

/// Minimum of the triangle density over the one-parameter family with
/// value 0 on a `c x c` block, 1 between blocks and `alpha` on the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase3Lower {
    pub tau: f64,
    pub c: f64,
    pub alpha: f64,
}

pub fn er_curve(eps: f64) -> f64 {
    eps * eps * eps
}

pub fn upper_boundary(eps: f64) -> f64 {
    eps.powf(1.5)
}

pub fn lower_parabola(eps: f64) -> f64 {
    eps * (2.0 * eps - 1.0)
}

/// Below this curve the symmetric bipodal graphon would need a value above 1.
pub fn phase2_natural_lower(eps: f64) -> f64 {
    2.0 * eps.powi(3) - 3.0 * eps * eps + 3.0 * eps - 1.0
}

/// Symmetric bipodal graphon: equal halves, `e - d` on the diagonal blocks
/// and `e + d` between them, `d = (e^3 - t)^{1/3}`.
pub fn phase2_graphon(target: DensityPair) -> Result<BlockGraphon> {
    let (e, t) = (target.edge, target.triangle);
    if t > er_curve(e) {
        return Err(Error::Domain { what: "phase2_graphon (needs t <= e^3)", value: t });
    }
    let d = (er_curve(e) - t).cbrt();
    let (diag, off) = (e - d, e + d);
    for v in [diag, off] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange { what: "phase2_graphon", value: v });
        }
    }
    BlockGraphon::from_upper(vec![0.5, 0.5], vec![diag, off, diag])
}

/// Two-block graphon of the perturbative family, fractions `(c, 1 - c)`.
pub fn ansatz_graphon(p: AnsatzParams) -> Result<BlockGraphon> {
    let c = p.c;
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain { what: "ansatz_graphon block fraction", value: c });
    }
    let a = ((1.0 - c) / c).sqrt();
    let b = (c / (1.0 - c)).sqrt();
    let g11 = p.eps + p.nu * (1.0 - c) / c + p.mu * SQRT_2 * a;
    let g12 = p.eps - p.nu + p.mu / SQRT_2 * (a - b);
    let g22 = p.eps + p.nu * c / (1.0 - c) - p.mu * SQRT_2 * b;
    for v in [g11, g12, g22] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange { what: "ansatz_graphon", value: v });
        }
    }
    BlockGraphon::from_upper(vec![c, 1.0 - c], vec![g11, g12, g22])
}

/// `e^3 + nu^3 + 3 mu^2 (e + nu) / 2`, independent of `c`.
pub fn ansatz_triangle(eps: f64, mu: f64, nu: f64) -> f64 {
    eps.powi(3) + nu.powi(3) + 1.5 * mu * mu * (eps + nu)
}

/// `ds/dt` just above the ER curve: `ln(e/(1-e)) / (3e(1-2e))`.
///
/// Written as `-atanh(2u) / (3 e u)` with `u = e - 1/2`, which is the same
/// value away from `e = 1/2` and has the limit `-4/3` there.
pub fn phase1_slope(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain { what: "phase1_slope", value: eps });
    }
    let u = eps - 0.5;
    if u == 0.0 {
        return Ok(-4.0 / 3.0);
    }
    Ok(-(2.0 * u).atanh() / (3.0 * eps * u))
}

/// Coefficients of `d^2 I / dc^2 = A mu'^2 + B mu' + C` at `c = 1/2` on the
/// symmetric bipodal graphon, `nu = -(e^3 - t)^{1/3}`.
pub fn stability_coeffs(eps: f64, tau: f64) -> Result<StabilityCoeffs> {
    if !(tau < er_curve(eps)) {
        return Err(Error::Domain { what: "stability_coeffs (needs t < e^3)", value: tau });
    }
    let nu = -(er_curve(eps) - tau).cbrt();
    let (p, m) = (eps + nu, eps - nu);
    let (d1p, d1m, d2p) = (i0_d1(p)?, i0_d1(m)?, i0_d2(p)?);
    let a = d2p + p * (d1m - d1p) / (2.0 * nu * nu);
    let b = 2.0 * SQRT_2 * (d1p - d1m - 2.0 * nu * d2p);
    let c = 4.0 * (i0(p) - 2.0 * nu * d1p + 2.0 * nu * nu * d2p - i0(m));
    Ok(StabilityCoeffs {
        a,
        b,
        c_coef: c,
        discriminant: b * b - 4.0 * a * c,
        mu_prime: -b / (2.0 * a),
    })
}

pub fn discriminant(eps: f64, tau: f64) -> Result<f64> {
    stability_coeffs(eps, tau).map(|s| s.discriminant)
}

/// Open `t`-interval on which the stability coefficients are defined.
fn discriminant_domain(eps: f64) -> Option<(f64, f64)> {
    let lo = phase2_natural_lower(eps).max(0.0);
    let hi = er_curve(eps);
    (eps > 0.0 && eps < 1.0 && lo < hi).then_some((lo, hi))
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Scan nodes strictly inside `(lo, hi)` with the discriminant at each.
fn scan_discriminant(eps: f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let w = hi - lo;
    // geometric refinement toward both ends, where roots crowd as e -> 1/2
    let near: Vec<f64> = (13..=40).map(|k| w * 10f64.powf(-(k as f64) / 4.0)).collect();
    let mut ts: Vec<f64> = near.iter().map(|d| lo + d).collect();
    ts.extend((1..SCAN_POINTS).map(|k| lo + w * k as f64 / SCAN_POINTS as f64));
    ts.extend(near.iter().map(|d| hi - d));
    ts.sort_by(f64::total_cmp);
    ts.into_iter()
        .filter_map(|t| discriminant(eps, t).ok().filter(|d| d.is_finite()).map(|d| (t, d)))
        .collect()
}

/// `(t, D)` at the minimum over `t` of the discriminant.
fn min_discriminant(eps: f64) -> Option<(f64, f64)> {
    let (lo, hi) = discriminant_domain(eps)?;
    let scan = scan_discriminant(eps, lo, hi);
    let k = (0..scan.len()).min_by(|&a, &b| scan[a].1.total_cmp(&scan[b].1))?;
    let a = if k == 0 { lo + 1e-3 * (scan[0].0 - lo) } else { scan[k - 1].0 };
    let b = if k + 1 == scan.len() { scan[k].0 + 0.5 * (hi - scan[k].0) } else { scan[k + 1].0 };
    let d = |t: f64| discriminant(eps, t).unwrap_or(f64::INFINITY);
    let t = golden_min(d, a, b);
    Some((t, d(t)))
}

/// Values of `t` in `(max(0, natural lower), e^3)` where the discriminant vanishes, ascending.
pub fn phase23_boundary(eps: f64) -> Vec<f64> {
    let Some((lo, hi)) = discriminant_domain(eps) else {
        return Vec::new();
    };
    let d = |t: f64| discriminant(eps, t).unwrap_or(f64::NAN);
    let scan = scan_discriminant(eps, lo, hi);
    let mut roots: Vec<f64> = scan
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| bisect(d, w[0].0, w[1].0))
        .collect();
    if roots.is_empty() {
        // two roots closer than the scan spacing straddle the minimum
        if let Some((tm, dm)) = min_discriminant(eps) {
            if dm < 0.0 {
                let k = scan.partition_point(|p| p.0 < tm);
                let left = if k == 0 { lo } else { scan[k - 1].0 };
                let right = scan.get(k).map_or(hi, |p| p.0);
                for (a, b) in [(left, tm), (tm, right)] {
                    if d(a) > 0.0 && d(b) < 0.0 || d(a) < 0.0 && d(b) > 0.0 {
                        roots.push(bisect(d, a, b));
                    }
                }
            }
        }
    }
    roots
}

/// The `e` beyond which the discriminant is nonnegative for every `t`,
/// i.e. where the two boundary roots merge.
pub fn critical_eps() -> f64 {
    let has_roots = |e: f64| min_discriminant(e).is_some_and(|(_, d)| d < 0.0);
    let (mut lo, mut hi) = (0.55, 0.7);
    debug_assert!(has_roots(lo) && !has_roots(hi));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if has_roots(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(1 - c) alpha` from the edge constraint.
fn phase3_beta(eps: f64, c: f64) -> f64 {
    (eps - 2.0 * c * (1.0 - c)) / (1.0 - c)
}

/// Triangle density of the family at block fraction `c` with `alpha` fixed by `e`.
pub fn phase3_tau(eps: f64, c: f64) -> f64 {
    let b = phase3_beta(eps, c);
    b.powi(3) + 3.0 * c * (1.0 - c) * b
}

/// `d phase3_tau / dc`.
pub fn phase3_dtau(eps: f64, c: f64) -> f64 {
    let b = phase3_beta(eps, c);
    let db = (eps - 2.0 + 4.0 * c - 2.0 * c * c) / ((1.0 - c) * (1.0 - c));
    3.0 * b * b * db + 3.0 * (1.0 - 2.0 * c) * b + 3.0 * c * (1.0 - c) * db
}

/// Lower envelope of the bipodal family above `e = 1/2`.
pub fn phase3_lower_boundary(eps: f64) -> Result<Phase3Lower> {
    if !(eps > 0.5 && eps < 1.0) {
        return Err(Error::Domain { what: "phase3_lower_boundary", value: eps });
    }
    // alpha in [0, 1] restricts c to [0, sqrt(1 - e)]
    let c_max = (1.0 - eps).sqrt();
    let grid: Vec<f64> = (0..=SCAN_POINTS).map(|k| c_max * k as f64 / SCAN_POINTS as f64).collect();
    let k = (0..grid.len())
        .min_by(|&a, &b| phase3_tau(eps, grid[a]).total_cmp(&phase3_tau(eps, grid[b])))
        .expect("nonempty grid");
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(SCAN_POINTS)];
    let (dlo, dhi) = (phase3_dtau(eps, lo), phase3_dtau(eps, hi));
    let c = if dlo < 0.0 && dhi > 0.0 {
        bisect(|c| phase3_dtau(eps, c), lo, hi)
    } else {
        grid[k]
    };
    Ok(Phase3Lower {
        tau: phase3_tau(eps, c),
        c,
        alpha: phase3_beta(eps, c) / (1.0 - c),
    })
}

/// Smallest `t` treated as feasible at `e`: zero up to `e = 1/2`, the bipodal envelope above.
pub fn lower_envelope(eps: f64) -> Result<f64> {
    if eps <= 0.5 {
        Ok(0.0)
    } else if eps >= 1.0 {
        Ok(1.0)
    } else {
        phase3_lower_boundary(eps).map(|p| p.tau)
    }
}

/// Phase of `target`; points within `tol` of a separating curve are `Boundary`.
pub fn classify(target: DensityPair, tol: f64) -> PhaseLabel {
    classify_inner(target, tol).unwrap_or(PhaseLabel::Unknown)
}

fn classify_inner(target: DensityPair, tol: f64) -> Result<PhaseLabel> {
    let (e, t) = (target.edge, target.triangle);
    let upper = upper_boundary(e);
    let lower = lower_envelope(e)?;
    if t > upper + tol || t < lower - tol {
        return Ok(PhaseLabel::Infeasible);
    }
    if (t - er_curve(e)).abs() <= tol {
        return Ok(PhaseLabel::ErCurve);
    }
    if (t - upper).abs() <= tol || (t - lower).abs() <= tol {
        return Ok(PhaseLabel::Boundary);
    }
    if t > er_curve(e) {
        return Ok(PhaseLabel::PhaseI);
    }
    if e <= 0.5 {
        return Ok(PhaseLabel::PhaseII);
    }
    if phase23_boundary(e).iter().any(|r| (t - r).abs() <= tol) {
        return Ok(PhaseLabel::Boundary);
    }
    if t >= phase2_natural_lower(e) && discriminant(e, t)? < 0.0 {
        Ok(PhaseLabel::PhaseII)
    } else {
        Ok(PhaseLabel::PhaseIII)
    }
}
