//! Static SVG figures from sweep and boundary CSV files.

use std::fmt::Write;

use anyhow::{bail, Result};
use graphon_core::PhaseLabel;

use crate::boundary::{parse_boundary, Curve, CurvePoint, BOUNDARY_SCHEMA};
use crate::record::{parse_rows, SweepRecord, SWEEP_SCHEMA};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 560.0;
const MARGIN: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Rate,
    C,
    Label,
}

impl std::str::FromStr for Field {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rate" => Ok(Self::Rate),
            "c" => Ok(Self::C),
            "label" => Ok(Self::Label),
            other => bail!("unknown render field {other:?}"),
        }
    }
}

fn px(e: f64) -> f64 {
    MARGIN + e * (WIDTH - 2.0 * MARGIN)
}

fn py(t: f64) -> f64 {
    HEIGHT - MARGIN - t * (HEIGHT - 2.0 * MARGIN)
}

fn axes(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{v}</text>"#,
            px(v),
            HEIGHT - MARGIN + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{v}</text>"#,
            MARGIN - 6.0,
            py(v) + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">e</text>"#, WIDTH / 2.0, HEIGHT - 18.0);
    let _ = writeln!(s, r#"<text x="18" y="{:.2}" font-size="13" text-anchor="middle">t</text>"#, HEIGHT / 2.0);
    let _ = writeln!(s, r#"<text x="{:.2}" y="30" font-size="14" text-anchor="middle">{title}</text>"#, WIDTH / 2.0);
    s
}

/// Three-stop blue-green-yellow ramp on `u` in `[0, 1]`.
fn ramp(u: f64) -> String {
    const STOPS: [(f64, f64, f64); 3] = [(68.0, 1.0, 84.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let u = u.clamp(0.0, 1.0) * 2.0;
    let (a, b, f) = if u < 1.0 { (STOPS[0], STOPS[1], u) } else { (STOPS[1], STOPS[2], u - 1.0) };
    let mix = |x: f64, y: f64| (x + f * (y - x)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn label_color(l: PhaseLabel) -> &'static str {
    match l {
        PhaseLabel::PhaseI => "#1f77b4",
        PhaseLabel::PhaseII => "#2ca02c",
        PhaseLabel::PhaseIII => "#d62728",
        PhaseLabel::ErCurve => "#9467bd",
        PhaseLabel::Boundary => "#7f7f7f",
        PhaseLabel::Infeasible => "#ffffff",
        PhaseLabel::Unknown => "#000000",
    }
}

pub fn render_sweep(rows: &[SweepRecord], field: Field) -> String {
    let value = |r: &SweepRecord| match field {
        Field::Rate => r.rate,
        Field::C => r.bipodal_view()[0],
        Field::Label => 0.0,
    };
    let finite: Vec<f64> = rows.iter().map(value).filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let title = match field {
        Field::Rate => format!("minimal I, range [{lo:.6}, {hi:.6}]"),
        Field::C => format!("leading block fraction c, range [{lo:.6}, {hi:.6}]"),
        Field::Label => "phase labels".to_string(),
    };
    let mut s = axes(if rows.is_empty() { "empty sweep" } else { &title });
    let size = 7.0;
    for r in rows {
        let fill = match field {
            Field::Label => label_color(r.label).to_string(),
            _ => {
                let v = value(r);
                if !v.is_finite() {
                    "none".to_string()
                } else if hi > lo {
                    ramp((v - lo) / (hi - lo))
                } else {
                    ramp(0.5)
                }
            }
        };
        let stroke = if r.converged { "none" } else { "black" };
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{size}" height="{size}" fill="{fill}" stroke="{stroke}"/>"#,
            px(r.eps) - size / 2.0,
            py(r.tau) - size / 2.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn curve_color(c: Curve) -> &'static str {
    match c {
        Curve::Er => "#1f77b4",
        Curve::Upper => "#000000",
        Curve::Parabola => "#8c564b",
        Curve::NaturalLower => "#ff7f0e",
        Curve::Phase23 => "#d62728",
        Curve::Phase3Lower => "#2ca02c",
        Curve::PinchOff => "#d62728",
    }
}

pub fn render_boundary(points: &[CurvePoint]) -> String {
    let mut s = axes(if points.is_empty() { "empty boundary table" } else { "phase boundaries" });
    for curve in Curve::ALL {
        let mut pts: Vec<&CurvePoint> = points.iter().filter(|p| p.curve == curve).collect();
        if pts.is_empty() {
            continue;
        }
        let color = curve_color(curve);
        if matches!(curve, Curve::Phase23 | Curve::PinchOff) {
            // two roots per column; drawn as dots
            for p in pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#, px(p.eps), py(p.tau));
            }
            continue;
        }
        pts.sort_by(|a, b| a.eps.total_cmp(&b.eps));
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", px(p.eps), py(p.tau))).collect();
        let dash = if curve == Curve::Er { r#" stroke-dasharray="6,3""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}><title>{}</title></polyline>"#,
            coords.join(" "),
            curve.as_str()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Render whichever table `text` holds; an empty file gives bare axes.
pub fn render_csv(text: &str, field: Field) -> Result<String> {
    let first = text.lines().next().unwrap_or("");
    if text.trim().is_empty() {
        Ok(render_sweep(&[], field))
    } else if first == SWEEP_SCHEMA {
        Ok(render_sweep(&parse_rows(text)?, field))
    } else if first == BOUNDARY_SCHEMA {
        Ok(render_boundary(&parse_boundary(text)?))
    } else {
        bail!("unrecognised CSV: first line {first:?} is not a known schema")
    }
}
