//! Curve tables for the phase diagram, and point classification.

use anyhow::{bail, Context, Result};
use graphon_core::phase::{
    classify, critical_eps, er_curve, lower_envelope, lower_parabola, phase23_boundary, phase2_natural_lower,
    phase3_lower_boundary, upper_boundary, CLASSIFY_TOL,
};
use graphon_core::{DensityPair, PhaseLabel};

use crate::config::Range;
use crate::record::csv_line;

pub const BOUNDARY_SCHEMA: &str = "#schema=graphon-boundary-v1";
pub const BOUNDARY_HEADER: [&str; 3] = ["eps", "tau", "curve"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Curve {
    Er,
    Upper,
    Parabola,
    NaturalLower,
    Phase23,
    Phase3Lower,
    PinchOff,
}

impl Curve {
    pub const ALL: [Curve; 7] =
        [Curve::Er, Curve::Upper, Curve::Parabola, Curve::NaturalLower, Curve::Phase23, Curve::Phase3Lower, Curve::PinchOff];

    pub fn as_str(self) -> &'static str {
        match self {
            Curve::Er => "er",
            Curve::Upper => "upper",
            Curve::Parabola => "parabola",
            Curve::NaturalLower => "phase2_natural_lower",
            Curve::Phase23 => "phase23",
            Curve::Phase3Lower => "phase3_lower",
            Curve::PinchOff => "pinch_off",
        }
    }
}

impl std::str::FromStr for Curve {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Curve::ALL.into_iter().find(|c| c.as_str() == s).with_context(|| format!("unknown curve {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub eps: f64,
    pub tau: f64,
    pub curve: Curve,
}

/// The II/III point where the two discriminant roots meet.
pub fn pinch_off() -> CurvePoint {
    let e = critical_eps();
    let roots = phase23_boundary(e - 1e-9);
    let tau = match roots.as_slice() {
        [.., a, b] => 0.5 * (a + b),
        [a] => *a,
        [] => f64::NAN,
    };
    CurvePoint { eps: e, tau, curve: Curve::PinchOff }
}

/// Every curve sampled on the `e` grid, grouped by curve. The parabola, the
/// natural lower curve and the phase III envelope are emitted for `e >= 1/2`,
/// the discriminant roots for `1/2 < e < e*`.
pub fn trace(eps: &Range) -> Result<Vec<CurvePoint>> {
    let es = eps.points();
    let e_star = critical_eps();
    let mut out = Vec::new();
    let mut push = |curve: Curve, e: f64, t: f64| {
        if t.is_finite() {
            out.push(CurvePoint { eps: e, tau: t, curve })
        }
    };
    for &e in &es {
        push(Curve::Er, e, er_curve(e));
    }
    for &e in &es {
        push(Curve::Upper, e, upper_boundary(e));
    }
    for &e in es.iter().filter(|&&e| e >= 0.5) {
        push(Curve::Parabola, e, lower_parabola(e));
    }
    for &e in es.iter().filter(|&&e| e >= 0.5) {
        push(Curve::NaturalLower, e, phase2_natural_lower(e));
    }
    for &e in es.iter().filter(|&&e| e > 0.5 && e < e_star) {
        for t in phase23_boundary(e) {
            push(Curve::Phase23, e, t);
        }
    }
    for &e in es.iter().filter(|&&e| e > 0.5 && e < 1.0) {
        push(Curve::Phase3Lower, e, phase3_lower_boundary(e)?.tau);
    }
    if es.first().is_some_and(|&lo| lo <= e_star) && es.last().is_some_and(|&hi| hi >= e_star) {
        let p = pinch_off();
        push(p.curve, p.eps, p.tau);
    }
    Ok(out)
}

pub fn boundary_csv(points: &[CurvePoint]) -> Vec<u8> {
    let mut out = format!("{BOUNDARY_SCHEMA}\n").into_bytes();
    out.extend(csv_line(&BOUNDARY_HEADER.map(String::from)));
    for p in points {
        out.extend(csv_line(&[p.eps.to_string(), p.tau.to_string(), p.curve.as_str().to_string()]));
    }
    out
}

pub fn parse_boundary(text: &str) -> Result<Vec<CurvePoint>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    if rdr.headers()?.iter().ne(BOUNDARY_HEADER.iter().copied()) {
        bail!("unexpected boundary header");
    }
    rdr.records()
        .map(|r| {
            let r = r?;
            Ok(CurvePoint { eps: r[0].parse()?, tau: r[1].parse()?, curve: r[2].parse()? })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: PhaseLabel,
    /// `(curve, |t - curve(e)|)` for every curve defined at `e`.
    pub distances: Vec<(&'static str, f64)>,
}

pub fn classify_point(target: DensityPair) -> Classification {
    let (e, t) = (target.edge, target.triangle);
    let mut distances = vec![("er", (t - er_curve(e)).abs()), ("upper", (t - upper_boundary(e)).abs())];
    if let Ok(lo) = lower_envelope(e) {
        distances.push(("lower_envelope", (t - lo).abs()));
    }
    if e > 0.5 {
        if let Some(d) = phase23_boundary(e).iter().map(|r| (t - r).abs()).reduce(f64::min) {
            distances.push(("phase23", d));
        }
        distances.push(("phase2_natural_lower", (t - phase2_natural_lower(e)).abs()));
    }
    Classification { label: classify(target, CLASSIFY_TOL), distances }
}
