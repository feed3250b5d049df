//! Text formats: graphs, datasets, manifests and trace logs.
//!
//! One graph format serves the whole crate. A file is a header line
//! `p <count>`, a partition line `labels O O L S ...`, then one line per
//! edge: `i -> j` for directed systems, or `i <mark> <mark> j` with marks in
//! `{-, >, o}` for mixed graphs (`0 o > 2` reads "o0 o-> o2"). Lines starting
//! with `#` are comments. All parsers reject malformed input with positioned
//! errors; none panic on untrusted bytes.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::graph::{DirectedSystem, EndpointMark, MixedGraph, VertexClass, VertexId};
use crate::Result;

/// Upper bound on the vertex count a file may declare.
const MAX_VERTICES: usize = 100_000;
/// Upper bound on dataset cells, guards allocation on hostile input.
const MAX_CELLS: usize = 200_000_000;

fn content_lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_header(line: &str, lineno: usize) -> Result<usize> {
    let mut it = line.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some("p"), Some(n), None) => {
            let p: usize = n
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad vertex count {n:?}")))?;
            if p > MAX_VERTICES {
                return Err(Error::parse(lineno, format!("vertex count {p} too large")));
            }
            Ok(p)
        }
        _ => Err(Error::parse(lineno, "expected header `p <count>`")),
    }
}

fn parse_labels(line: &str, lineno: usize, p: usize) -> Result<Vec<VertexClass>> {
    let mut it = line.split_whitespace();
    if it.next() != Some("labels") {
        return Err(Error::parse(lineno, "expected `labels ...` line"));
    }
    let classes: Vec<VertexClass> = it
        .map(|t| match t {
            "O" => Ok(VertexClass::Observed),
            "L" => Ok(VertexClass::Latent),
            "S" => Ok(VertexClass::Selection),
            other => Err(Error::parse(lineno, format!("unknown label {other:?}"))),
        })
        .collect::<Result<_>>()?;
    if classes.len() != p {
        return Err(Error::parse(
            lineno,
            format!("expected {p} labels, got {}", classes.len()),
        ));
    }
    Ok(classes)
}

fn parse_vertex(tok: &str, lineno: usize, p: usize) -> Result<VertexId> {
    let v: u32 = tok
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad vertex id {tok:?}")))?;
    if (v as usize) < p {
        Ok(v)
    } else {
        Err(Error::parse(lineno, format!("vertex {v} out of range")))
    }
}

/// Parses a directed system file.
pub fn parse_directed_system(input: &str) -> Result<DirectedSystem> {
    let mut lines = content_lines(input);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty graph file"))?;
    let p = parse_header(header, ln)?;
    let (ln, labels_line) = lines
        .next()
        .ok_or_else(|| Error::parse(ln, "missing labels line"))?;
    let labels = parse_labels(labels_line, ln, p)?;
    let mut g = DirectedSystem::new(p, &[])?;
    g.set_labels(labels)?;
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [i, "->", j] => {
                let i = parse_vertex(i, ln, p)?;
                let j = parse_vertex(j, ln, p)?;
                if g.has_edge(i, j) {
                    return Err(Error::parse(ln, format!("duplicate edge {i} -> {j}")));
                }
                g.add_edge(i, j)
                    .map_err(|e| Error::parse(ln, e.to_string()))?;
            }
            _ => return Err(Error::parse(ln, "expected edge line `i -> j`")),
        }
    }
    Ok(g)
}

/// Serializes a directed system.
pub fn write_directed_system(g: &DirectedSystem) -> String {
    let mut out = String::new();
    out.push_str(&format!("p {}\n", g.p()));
    out.push_str("labels");
    for &l in g.labels() {
        out.push(' ');
        out.push(l.letter());
    }
    out.push('\n');
    for (i, j) in g.edges() {
        out.push_str(&format!("{i} -> {j}\n"));
    }
    out
}

/// Parses a mixed graph file (labels line must be all `O`).
pub fn parse_mixed_graph(input: &str) -> Result<MixedGraph> {
    let mut lines = content_lines(input);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty graph file"))?;
    let p = parse_header(header, ln)?;
    let (ln, labels_line) = lines
        .next()
        .ok_or_else(|| Error::parse(ln, "missing labels line"))?;
    let labels = parse_labels(labels_line, ln, p)?;
    if labels.iter().any(|&l| l != VertexClass::Observed) {
        return Err(Error::parse(ln, "mixed graphs are over observed vertices"));
    }
    let mut m = MixedGraph::new(p);
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [i, mi, mj, j] => {
                let i = parse_vertex(i, ln, p)?;
                let j = parse_vertex(j, ln, p)?;
                let mi = EndpointMark::from_symbol(mi)
                    .ok_or_else(|| Error::parse(ln, format!("bad mark {mi:?}")))?;
                let mj = EndpointMark::from_symbol(mj)
                    .ok_or_else(|| Error::parse(ln, format!("bad mark {mj:?}")))?;
                m.add_edge(i, j, mi, mj)
                    .map_err(|e| Error::parse(ln, e.to_string()))?;
            }
            _ => return Err(Error::parse(ln, "expected edge line `i <mark> <mark> j`")),
        }
    }
    Ok(m)
}

/// Serializes a mixed graph.
pub fn write_mixed_graph(m: &MixedGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!("p {}\n", m.p()));
    out.push_str("labels");
    for _ in 0..m.p() {
        out.push_str(" O");
    }
    out.push('\n');
    for (i, j) in m.edges() {
        let (mi, mj) = m.marks(i, j).expect("edge present");
        out.push_str(&format!("{i} {} {} {j}\n", mi.symbol(), mj.symbol()));
    }
    out
}

/// A tabular dataset with columns bound to observed vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Row-major `n_rows x columns.len()`.
    pub values: Vec<f64>,
    /// Original vertex id of each column.
    pub columns: Vec<VertexId>,
    pub n_rows: usize,
    /// Rows drawn before selection filtering.
    pub n_raw: usize,
}

impl Dataset {
    pub fn new(values: Vec<f64>, columns: Vec<VertexId>, n_raw: usize) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("dataset needs at least one column"));
        }
        if values.len() % columns.len() != 0 {
            return Err(Error::invalid("ragged dataset"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("dataset contains non-finite values".into()));
        }
        let mut sorted = columns.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != columns.len() {
            return Err(Error::invalid("duplicate column binding"));
        }
        let n_rows = values.len() / columns.len();
        Ok(Dataset {
            values,
            columns,
            n_rows,
            n_raw,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.columns.len() + col]
    }

    pub fn column_index(&self, vertex: VertexId) -> Option<usize> {
        self.columns.iter().position(|&c| c == vertex)
    }
}

/// Parses a dataset file: a header of `O<i>` names, then comma-separated
/// rows of real values.
pub fn parse_dataset(input: &str) -> Result<Dataset> {
    let mut lines = content_lines(input);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty dataset file"))?;
    let mut columns = Vec::new();
    for name in header.split(',') {
        let name = name.trim();
        let id = name
            .strip_prefix('O')
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| Error::parse(ln, format!("bad column name {name:?}")))?;
        columns.push(id);
    }
    let width = columns.len();
    let mut values = Vec::new();
    for (ln, line) in lines {
        let mut count = 0;
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad value {tok:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(ln, "non-finite value"));
            }
            values.push(v);
            count += 1;
            if values.len() > MAX_CELLS {
                return Err(Error::parse(ln, "dataset too large"));
            }
        }
        if count != width {
            return Err(Error::parse(
                ln,
                format!("expected {width} values, got {count}"),
            ));
        }
    }
    let n_rows = values.len() / width;
    Dataset::new(values, columns, n_rows)
}

/// Serializes a dataset; values are written with full round-trip precision.
pub fn write_dataset(d: &Dataset) -> String {
    let mut out = String::new();
    let names: Vec<String> = d.columns.iter().map(|c| format!("O{c}")).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for row in 0..d.n_rows {
        for col in 0..d.n_cols() {
            if col > 0 {
                out.push(',');
            }
            // {:?} on f64 prints the shortest representation that round-trips.
            out.push_str(&format!("{:?}", d.value(row, col)));
        }
        out.push('\n');
    }
    out
}

/// Parses `key=value` manifest lines.
pub fn parse_manifest(input: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (ln, line) in content_lines(input) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(ln, "expected `key=value`"))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::parse(ln, "empty key"));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::parse(ln, format!("duplicate key {k:?}")));
        }
    }
    Ok(out)
}

/// Serializes manifest entries in the given order.
pub fn write_manifest(entries: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(&format!("{k}={v}\n"));
    }
    out
}
