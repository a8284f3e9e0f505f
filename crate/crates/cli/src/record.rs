//! The versioned sweep CSV: one row per grid point.

use anyhow::{bail, Context, Result};
use graphon_core::graphon::CANONICAL_TOL;
use graphon_core::{BlockGraphon, DensityPair, PhaseLabel, SolveReport};

pub const SWEEP_SCHEMA: &str = "#schema=graphon-sweep-v1";

pub const SWEEP_HEADER: [&str; 15] = [
    "idx", "eps", "tau", "label", "converged", "n_blocks", "n_canonical", "rate", "entropy", "c", "g11",
    "g12", "g22", "fractions", "upper",
];

/// Result at one grid point. Points without any solver report carry NaN
/// values and an empty graphon.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub idx: usize,
    pub eps: f64,
    pub tau: f64,
    pub label: PhaseLabel,
    pub converged: bool,
    /// Block count the solver was run with.
    pub n_blocks: usize,
    pub rate: f64,
    /// Canonical minimizer.
    pub graphon: Option<BlockGraphon>,
}

impl SweepRecord {
    /// The rate is re-evaluated on the canonical minimizer so that the row
    /// is consistent with its stored graphon.
    pub fn from_report(idx: usize, target: DensityPair, label: PhaseLabel, n_blocks: usize, r: &SolveReport) -> Self {
        let g = r.minimizer.canonicalize(CANONICAL_TOL);
        Self {
            idx,
            eps: target.edge,
            tau: target.triangle,
            label,
            converged: r.converged,
            n_blocks,
            rate: g.rate().rate,
            graphon: Some(g),
        }
    }

    pub fn failed(idx: usize, target: DensityPair, label: PhaseLabel, n_blocks: usize) -> Self {
        Self { idx, eps: target.edge, tau: target.triangle, label, converged: false, n_blocks, rate: f64::NAN, graphon: None }
    }

    pub fn entropy(&self) -> f64 {
        -self.rate
    }

    /// `(c, g11, g12, g22)` of the leading two blocks; a single block repeats its value.
    pub fn bipodal_view(&self) -> [f64; 4] {
        match &self.graphon {
            None => [f64::NAN; 4],
            Some(g) if g.n_blocks() == 1 => [1.0, g.value(0, 0), g.value(0, 0), g.value(0, 0)],
            Some(g) => [g.fractions()[0], g.value(0, 0), g.value(0, 1), g.value(1, 1)],
        }
    }

    pub fn to_fields(&self) -> Vec<String> {
        let [c, g11, g12, g22] = self.bipodal_view();
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        let (n_canon, fr, up) = match &self.graphon {
            Some(g) => (g.n_blocks().to_string(), join(g.fractions()), join(g.upper())),
            None => ("0".to_string(), String::new(), String::new()),
        };
        vec![
            self.idx.to_string(),
            self.eps.to_string(),
            self.tau.to_string(),
            self.label.to_string(),
            self.converged.to_string(),
            self.n_blocks.to_string(),
            n_canon,
            self.rate.to_string(),
            self.entropy().to_string(),
            c.to_string(),
            g11.to_string(),
            g12.to_string(),
            g22.to_string(),
            fr,
            up,
        ]
    }

    pub fn from_fields(rec: &csv::StringRecord) -> Result<Self> {
        if rec.len() != SWEEP_HEADER.len() {
            bail!("expected {} fields, found {}", SWEEP_HEADER.len(), rec.len());
        }
        let f = |k: usize| -> Result<f64> {
            rec[k].parse().with_context(|| format!("field {} = {:?}", SWEEP_HEADER[k], &rec[k]))
        };
        let list = |k: usize| -> Result<Vec<f64>> {
            rec[k].split(';').filter(|s| !s.is_empty()).map(|s| Ok(s.parse()?)).collect()
        };
        let fractions = list(13)?;
        let graphon = if fractions.is_empty() {
            None
        } else {
            Some(BlockGraphon::from_upper(fractions, list(14)?)?)
        };
        Ok(Self {
            idx: rec[0].parse()?,
            eps: f(1)?,
            tau: f(2)?,
            label: rec[3].parse()?,
            converged: rec[4].parse()?,
            n_blocks: rec[5].parse()?,
            rate: f(7)?,
            graphon,
        })
    }
}

/// One CSV line, newline included.
pub fn csv_line(fields: &[String]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    w.into_inner().expect("flushing to memory")
}

/// Rows of a sweep CSV body, skipping `#` comment lines and the header.
pub fn parse_rows(text: &str) -> Result<Vec<SweepRecord>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        bail!("unexpected sweep header {:?}", header);
    }
    rdr.records()
        .enumerate()
        .map(|(k, r)| SweepRecord::from_fields(&r?).with_context(|| format!("row {k}")))
        .collect()
}
