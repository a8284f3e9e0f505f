//! Real roots of polynomials of degree at most three.
//!
//! Roots are isolated between the critical points of the polynomial and
//! refined by bisection, so every returned root comes from a verified sign
//! change (or an exact/tangential zero at a critical point).

/// Real roots of `a3 x^3 + a2 x^2 + a1 x + a0`, ascending and deduplicated.
///
/// A polynomial that vanishes identically has no isolated roots and yields
/// an empty list; callers that care must check for it themselves.
pub fn real_roots_cubic(a3: f64, a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    let scale = a3.abs().max(a2.abs()).max(a1.abs()).max(a0.abs());
    if scale == 0.0 || !scale.is_finite() {
        return Vec::new();
    }
    let (a3, a2, a1, a0) = (a3 / scale, a2 / scale, a1 / scale, a0 / scale);
    let negligible = |x: f64| x.abs() <= 1e-14;

    if negligible(a3) {
        if negligible(a2) {
            if negligible(a1) {
                return Vec::new();
            }
            return vec![-a0 / a1];
        }
        return real_roots_quadratic(a2, a1, a0);
    }

    let p = |x: f64| ((a3 * x + a2) * x + a1) * x + a0;
    // Cauchy bound on root magnitude
    let bound = 1.0 + (a2.abs().max(a1.abs()).max(a0.abs())) / a3.abs();
    let mut knots = vec![-bound];
    knots.extend(
        real_roots_quadratic(3.0 * a3, 2.0 * a2, a1)
            .into_iter()
            .filter(|x| x.abs() < bound),
    );
    knots.push(bound);

    let mut roots = Vec::with_capacity(3);
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (p(lo), p(hi));
        if flo == 0.0 {
            roots.push(lo);
        } else if flo.signum() != fhi.signum() && fhi != 0.0 {
            roots.push(bisect(p, lo, hi));
        }
    }
    if p(bound) == 0.0 {
        roots.push(bound);
    }
    // tangential zeros (double roots) touch zero at a critical point
    for &k in &knots[1..knots.len() - 1] {
        if p(k).abs() <= 1e-15 && !roots.iter().any(|r| (r - k).abs() <= 1e-9 * (1.0 + k.abs())) {
            roots.push(k);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
    roots
}

/// Real roots of `a x^2 + b x + c`, ascending.
pub fn real_roots_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    // stable form, avoids cancellation between -b and sqrt(disc)
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    let mut r = vec![r1.min(r2), r1.max(r2)];
    r.dedup();
    r
}

/// Bisection on a bracket with a sign change, run until the midpoint stops moving.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
