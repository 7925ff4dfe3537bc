//! CSV and JSON report writers. Every report starts with run metadata: a
//! `# meta {json}` line in CSV, a `"meta"` key in JSON.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::picard::IntegralRecord;
use crate::spectrum::{BandInterval, GridRow, SpectralArc};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub potential: String,
    pub label: Option<String>,
    pub config: Value,
}

impl Meta {
    pub fn new(subcommand: &str, potential: &str, label: Option<String>, config: Value) -> Self {
        Self {
            tool: "hill",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_owned(),
            potential: potential.to_owned(),
            label,
            config,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GridCsvRow {
    pub re_z: f64,
    pub im_z: f64,
    pub re_delta: f64,
    pub im_delta: f64,
    pub dist: f64,
}

impl From<&GridRow> for GridCsvRow {
    fn from(r: &GridRow) -> Self {
        Self {
            re_z: r.z.re,
            im_z: r.z.im,
            re_delta: r.delta.re,
            im_delta: r.delta.im,
            dist: r.dist,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BandCsvRow {
    pub lo: f64,
    pub hi: f64,
    pub edge_lo: &'static str,
    pub edge_hi: &'static str,
}

impl From<&BandInterval> for BandCsvRow {
    fn from(b: &BandInterval) -> Self {
        Self {
            lo: b.lo,
            hi: b.hi,
            edge_lo: b.edge_lo.label(),
            edge_hi: b.edge_hi.label(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ArcCsvRow {
    pub idx: usize,
    pub re_z: f64,
    pub im_z: f64,
    pub re_delta: f64,
}

/// Arc points numbered consecutively across all arcs, in the given order.
pub fn arc_rows(arcs: &[SpectralArc]) -> Vec<ArcCsvRow> {
    arcs.iter()
        .flat_map(|a| a.points.iter())
        .enumerate()
        .map(|(idx, p)| ArcCsvRow {
            idx,
            re_z: p.z.re,
            im_z: p.z.im,
            re_delta: p.delta.re,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct HomotopyCsvRow {
    pub eps: f64,
    pub re_delta: f64,
    pub im_delta: f64,
    pub deviation: f64,
}

#[derive(Debug, Serialize)]
pub struct EigenCsvRow {
    pub idx: usize,
    pub seed: f64,
    pub re_z: f64,
    pub im_z: f64,
    pub residual: f64,
    pub converged: bool,
}

pub fn write_meta_line<W: Write>(w: &mut W, meta: &Meta) -> io::Result<()> {
    writeln!(w, "# meta {}", serde_json::to_string(meta)?)
}

/// A CSV row type; `HEADERS` lists its fields in declaration order.
pub trait CsvRecord: Serialize {
    const HEADERS: &'static [&'static str];
}

impl CsvRecord for GridCsvRow {
    const HEADERS: &'static [&'static str] = &["re_z", "im_z", "re_delta", "im_delta", "dist"];
}

impl CsvRecord for BandCsvRow {
    const HEADERS: &'static [&'static str] = &["lo", "hi", "edge_lo", "edge_hi"];
}

impl CsvRecord for ArcCsvRow {
    const HEADERS: &'static [&'static str] = &["idx", "re_z", "im_z", "re_delta"];
}

impl CsvRecord for HomotopyCsvRow {
    const HEADERS: &'static [&'static str] = &["eps", "re_delta", "im_delta", "deviation"];
}

impl CsvRecord for EigenCsvRow {
    const HEADERS: &'static [&'static str] =
        &["idx", "seed", "re_z", "im_z", "residual", "converged"];
}

impl CsvRecord for IntegralRecord {
    const HEADERS: &'static [&'static str] = &["seed", "j", "k", "re", "im"];
}

/// Meta line, header, then one record per row. The header is written even
/// when there are no rows.
pub fn write_csv<W: Write, R: CsvRecord>(mut w: W, meta: &Meta, rows: &[R]) -> io::Result<()> {
    write_meta_line(&mut w, meta)?;
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(R::HEADERS)?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()
}

/// Pretty JSON object with `meta` merged into `body`.
pub fn json_document(meta: &Meta, body: Value) -> String {
    let mut map = match body {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("meta".into(), serde_json::to_value(meta).expect("meta serializes"));
    let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("json serializes");
    s.push('\n');
    s
}
