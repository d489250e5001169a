//! Text formats: graph edge lists, distance matrices and churn rows.
//!
//! Graph files look like
//!
//! ```text
//! # optional comments
//! 3 2
//! 0 1 0.25
//! 1 2 0.5
//! ```
//!
//! The first non-comment line is `n m`, followed by exactly `m` edge lines.
//! Weights are written with Rust's shortest round-trip formatting, so a save
//! and load gives back the identical graph.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lsp_apsp_core::{ChurnReport, WeightedDigraph};

use crate::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<WeightedDigraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut g: Option<WeightedDigraph> = None;
    let mut seen = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut toks = text.split_whitespace();
        match header {
            None => {
                let n: usize = field(toks.next(), line_no, "vertex count")?;
                let m: usize = field(toks.next(), line_no, "edge count")?;
                if toks.next().is_some() {
                    return Err(parse_err(line_no, "header must be \"n m\""));
                }
                let graph = WeightedDigraph::empty(n).map_err(|e| parse_err(line_no, e.to_string()))?;
                if m > n * n.saturating_sub(1) {
                    return Err(parse_err(line_no, format!("{m} edges cannot fit in {n} vertices")));
                }
                header = Some((n, m));
                g = Some(graph);
            }
            Some((n, m)) => {
                let u: usize = field(toks.next(), line_no, "source vertex")?;
                let v: usize = field(toks.next(), line_no, "target vertex")?;
                let w: f64 = field(toks.next(), line_no, "weight")?;
                if toks.next().is_some() {
                    return Err(parse_err(line_no, "edge line must be \"u v w\""));
                }
                if u >= n || v >= n {
                    return Err(parse_err(line_no, format!("vertex out of range in ({u},{v})")));
                }
                if u == v {
                    return Err(parse_err(line_no, format!("self-loop at {u}")));
                }
                if !(w.is_finite() && w > 0.0) {
                    return Err(parse_err(line_no, format!("weight must be positive and finite, got {w}")));
                }
                seen += 1;
                if seen > m {
                    return Err(parse_err(line_no, format!("more than the declared {m} edges")));
                }
                let graph = g.as_mut().expect("header parsed");
                if graph.has_edge(u, v) {
                    return Err(parse_err(line_no, format!("duplicate edge ({u},{v})")));
                }
                graph.insert_edge(u, v, w).map_err(|e| parse_err(line_no, e.to_string()))?;
            }
        }
    }
    let Some((_, m)) = header else {
        return Err(parse_err(0, "missing \"n m\" header"));
    };
    if seen != m {
        return Err(parse_err(0, format!("declared {m} edges but found {seen}")));
    }
    Ok(g.expect("header parsed"))
}

pub fn write_graph<W: Write>(g: &WeightedDigraph, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", g.n(), g.edge_count())?;
    for (u, v, weight) in g.edges() {
        writeln!(w, "{u} {v} {weight}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_graph(path: &Path) -> Result<WeightedDigraph> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    read_graph(BufReader::new(file))
}

pub fn save_graph(g: &WeightedDigraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
    write_graph(g, BufWriter::new(file))
}

/// `n` rows of `n` comma-separated distances; unreachable pairs are `inf`.
pub fn write_dist_csv<W: Write>(dist: &[f64], n: usize, mut w: W) -> Result<()> {
    let mut line = String::new();
    for row in dist.chunks(n) {
        line.clear();
        for (i, d) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            if d.is_finite() {
                line.push_str(&d.to_string());
            } else {
                line.push_str("inf");
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dist_csv<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut width = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| match tok.trim() {
                "inf" => Ok(f64::INFINITY),
                t => t.parse().map_err(|_| parse_err(idx + 1, format!("bad distance {t:?}"))),
            })
            .collect::<Result<_>>()?;
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(parse_err(idx + 1, "ragged distance row"));
        }
        out.extend(row);
    }
    Ok(out)
}

pub const CHURN_CSV_HEADER: &str = "seed,n,update_index,sp_minus,sp_plus,lsp_minus,lsp_plus,lambda,micros";

/// One update's churn. `micros` is empty in the CSV when timing is off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ChurnRow {
    pub seed: u64,
    pub n: usize,
    pub update_index: usize,
    pub report: ChurnReport,
    pub micros: Option<u64>,
}

impl ChurnRow {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let r = &self.report;
        write!(
            w,
            "{},{},{},{},{},{},{},{},",
            self.seed, self.n, self.update_index, r.sp_minus, r.sp_plus, r.lsp_minus, r.lsp_plus, r.lambda
        )?;
        match self.micros {
            Some(us) => writeln!(w, "{us}")?,
            None => writeln!(w)?,
        }
        Ok(())
    }
}

pub fn write_churn_csv<W: Write>(rows: &[ChurnRow], mut w: W) -> Result<()> {
    writeln!(w, "{CHURN_CSV_HEADER}")?;
    for row in rows {
        row.write_csv(&mut w)?;
    }
    w.flush()?;
    Ok(())
}
