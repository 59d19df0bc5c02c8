//! Text formats: DAG and weight files, and the CSV tables.
//!
//! Files are 1-based. A DAG file starts with `p <count>` followed by one
//! `i j` line per edge; a weight file has the same layout with a third
//! column. Blank lines and `#` comments are ignored.

use crate::bounds::BoundRow;
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::sem::Weights;
use crate::volume::SweepRow;
use std::fmt::Write;

pub const CSV_HEADER: &str = "family,p,density_or_en,lambda,c,class,samples,proportion,ci95,seed";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

struct Parsed {
    p: usize,
    edges: Vec<(usize, usize, Option<f64>)>,
}

fn parse_lines(text: &str, columns: usize) -> Result<Parsed> {
    let mut p = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some(p) = p else {
            if fields.len() != 2 || fields[0] != "p" {
                return Err(parse_err(line_no, "expected header `p <count>`"));
            }
            let n: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad vertex count `{}`", fields[1])))?;
            if n == 0 || n > crate::graph::MAX_VERTICES {
                return Err(parse_err(line_no, format!("vertex count {n} outside 1..=64")));
            }
            p = Some(n);
            continue;
        };
        if fields.len() != columns {
            return Err(parse_err(line_no, format!("expected {columns} columns, found {}", fields.len())));
        }
        let vertex = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| parse_err(line_no, format!("bad vertex `{s}`")))?;
            if v == 0 || v > p {
                return Err(parse_err(line_no, format!("vertex {v} outside 1..={p}")));
            }
            Ok(v - 1)
        };
        let (i, j) = (vertex(fields[0])?, vertex(fields[1])?);
        if i >= j {
            return Err(parse_err(line_no, format!("edge {} {} must satisfy i < j", i + 1, j + 1)));
        }
        if edges.iter().any(|&(a, b, _)| (a, b) == (i, j)) {
            return Err(parse_err(line_no, format!("duplicate edge {} {}", i + 1, j + 1)));
        }
        let w = if columns == 3 {
            let w: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad weight `{}`", fields[2])))?;
            if !w.is_finite() {
                return Err(parse_err(line_no, "weight is not finite"));
            }
            Some(w)
        } else {
            None
        };
        edges.push((i, j, w));
    }
    let p = p.ok_or_else(|| parse_err(text.lines().count().max(1), "missing header `p <count>`"))?;
    Ok(Parsed { p, edges })
}

pub fn parse_dag(text: &str) -> Result<Dag> {
    let parsed = parse_lines(text, 2)?;
    Dag::new(parsed.p, parsed.edges.iter().map(|&(i, j, _)| (i, j)))
}

/// Edges in sorted order, so a written file reads back to the same bytes.
pub fn write_dag(g: &Dag) -> String {
    let mut out = format!("p {}\n", g.p());
    for &(i, j) in g.edges() {
        writeln!(out, "{} {}", i + 1, j + 1).unwrap();
    }
    out
}

/// Weights on the cube of radius `r`.
pub fn parse_weights(text: &str, r: f64) -> Result<Weights> {
    let parsed = parse_lines(text, 3)?;
    let dag = Dag::new(parsed.p, parsed.edges.iter().map(|&(i, j, _)| (i, j)))?;
    let values = dag
        .edges()
        .iter()
        .map(|&(i, j)| {
            parsed
                .edges
                .iter()
                .find(|e| (e.0, e.1) == (i, j))
                .and_then(|e| e.2)
                .expect("every parsed edge has a weight")
        })
        .collect();
    Weights::with_radius(dag, values, r)
}

/// Weights against a separately supplied DAG; the edge sets must agree.
pub fn parse_weights_for(dag: &Dag, text: &str, r: f64) -> Result<Weights> {
    let w = parse_weights(text, r)?;
    if w.dag() != dag {
        return Err(Error::InvalidWeights(
            "weight file edges do not match the DAG file".into(),
        ));
    }
    Ok(w)
}

/// Shortest decimal that parses back to the same `f64`.
pub fn write_weights(w: &Weights) -> String {
    let g = w.dag();
    let mut out = format!("p {}\n", g.p());
    for (&(i, j), v) in g.edges().iter().zip(w.values()) {
        writeln!(out, "{} {} {}", i + 1, j + 1, v).unwrap();
    }
    out
}

/// Fixed-point decimal with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return "NA".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit
    let back: f64 = s.parse().unwrap_or(x);
    if back != 0.0 && (back.abs().log10().floor() as i32) > mag && decimals > 0 {
        let d = decimals - 1;
        return format!("{x:.d$}");
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_else(|| "NA".into())
}

fn sweep_fields(row: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        row.family,
        row.p,
        sig6(row.density),
        sig6(row.lambda),
        sig6(row.c),
        row.class.label(),
        row.samples,
        opt(row.proportion),
        opt(row.ci95),
        row.seed
    )
}

/// Sweep table; with `bounds`, one extra column aligned with `rows`.
pub fn sweep_csv(rows: &[SweepRow], bounds: Option<&[Option<f64>]>) -> String {
    let mut out = String::from(CSV_HEADER);
    if bounds.is_some() {
        out.push_str(",bound");
    }
    out.push('\n');
    for (k, row) in rows.iter().enumerate() {
        out.push_str(&sweep_fields(row));
        if let Some(b) = bounds {
            out.push(',');
            out.push_str(&opt(b[k]));
        }
        out.push('\n');
    }
    out
}

/// Bound table in the sweep schema; the Monte Carlo columns are `NA`.
pub fn bounds_csv(rows: &[BoundRow], density: impl Fn(&BoundRow) -> f64) -> String {
    let mut out = format!("{CSV_HEADER},bound\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},0,{},0,NA,NA,NA,{}",
            row.family,
            row.p,
            sig6(density(row)),
            sig6(row.lambda),
            row.class.label(),
            sig6(row.bound)
        )
        .unwrap();
    }
    out
}
