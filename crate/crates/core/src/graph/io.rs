//! Plain-text dataset files.
//!
//! | file             | layout                                               |
//! |------------------|------------------------------------------------------|
//! | `nodes.csv`      | header `id,kind,f1..fF`, one row per node, ids 0..n   |
//! | `edges.tsv`      | `u<TAB>v<TAB>e1..eF`, one line per undirected edge, `u < v` |
//! | `labels_dp.tsv`  | `node<TAB>0/1`                                       |
//! | `labels_sc.tsv`  | `u<TAB>v<TAB>0/1`                                    |
//! | `mined_edges.tsv`| `u<TAB>v<TAB>score`                                  |
//!
//! UTF-8, LF line endings, `.` decimal separator. Floats are written in
//! shortest round-trip form so files reload bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{MinedEdge, NodeKind, SmeGraph};
use crate::error::{Error, Result};
use crate::nn::Tensor2;

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.tsv";
pub const LABELS_DP_FILE: &str = "labels_dp.tsv";
pub const LABELS_SC_FILE: &str = "labels_sc.tsv";
pub const MINED_EDGES_FILE: &str = "mined_edges.tsv";

pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

/// Non-empty lines with 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).filter(|(_, l)| !l.is_empty())
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, raw: &str, what: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| parse_err(path, line, format!("bad {what} `{raw}`")))
}

fn bit(path: &Path, line: usize, raw: &str) -> Result<bool> {
    match raw.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(parse_err(path, line, format!("label must be 0 or 1, got `{other}`"))),
    }
}

fn finite(path: &Path, line: usize, raw: &str) -> Result<f64> {
    let v: f64 = field(path, line, raw, "number")?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value `{raw}`")));
    }
    Ok(v)
}

pub fn write_graph(dir: &Path, g: &SmeGraph) -> Result<()> {
    let fx = g.node_features().cols();
    let mut s = String::from("id,kind");
    for j in 1..=fx {
        let _ = write!(s, ",f{j}");
    }
    s.push('\n');
    for u in 0..g.num_nodes() {
        let _ = write!(s, "{u},{}", g.node_kind(u));
        for &x in g.node_features().row(u) {
            let _ = write!(s, ",{x}");
        }
        s.push('\n');
    }
    write_atomic(&dir.join(NODES_FILE), &s)?;

    let mut s = String::new();
    for (u, v, pos) in g.edges() {
        let _ = write!(s, "{u}\t{v}");
        for &x in g.edge_features().row(pos) {
            let _ = write!(s, "\t{x}");
        }
        s.push('\n');
    }
    write_atomic(&dir.join(EDGES_FILE), &s)
}

pub fn read_graph(dir: &Path) -> Result<SmeGraph> {
    let path = dir.join(NODES_FILE);
    let text = read(&path)?;
    let mut it = lines(&text);
    let (hl, header) = it.next().ok_or_else(|| parse_err(&path, 1, "missing header"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols[0] != "id" || cols[1] != "kind" {
        return Err(parse_err(&path, hl, "header must start with `id,kind`"));
    }
    let fx = cols.len() - 2;
    let mut kinds = Vec::new();
    let mut feats = Vec::new();
    for (ln, line) in it {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != fx + 2 {
            return Err(parse_err(&path, ln, format!("expected {} fields, found {}", fx + 2, parts.len())));
        }
        let id: usize = field(&path, ln, parts[0], "node id")?;
        if id != kinds.len() {
            return Err(parse_err(&path, ln, format!("node ids must be consecutive from 0; expected {}", kinds.len())));
        }
        kinds.push(parts[1].parse::<NodeKind>().map_err(|m| parse_err(&path, ln, m))?);
        for raw in &parts[2..] {
            feats.push(finite(&path, ln, raw)?);
        }
    }
    let n = kinds.len();
    let x = Tensor2::from_vec(n, fx, feats)?;

    let path = dir.join(EDGES_FILE);
    let text = read(&path)?;
    let mut pairs = Vec::new();
    let mut efeats = Vec::new();
    let mut fe = None;
    for (ln, line) in lines(&text) {
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() < 2 {
            return Err(parse_err(&path, ln, "expected at least `u<TAB>v`"));
        }
        let width = parts.len() - 2;
        if *fe.get_or_insert(width) != width {
            return Err(parse_err(&path, ln, "inconsistent edge feature count"));
        }
        let u: usize = field(&path, ln, parts[0], "node id")?;
        let v: usize = field(&path, ln, parts[1], "node id")?;
        if u >= v {
            return Err(parse_err(&path, ln, format!("edge ({u}, {v}) must satisfy u < v")));
        }
        if v >= n {
            return Err(parse_err(&path, ln, format!("node {v} not declared in nodes.csv")));
        }
        pairs.push((u, v));
        for raw in &parts[2..] {
            efeats.push(finite(&path, ln, raw)?);
        }
    }
    let ef = Tensor2::from_vec(pairs.len(), fe.unwrap_or(0), efeats)?;
    SmeGraph::from_edges(x, kinds, &pairs, Some(&ef)).map_err(|e| parse_err(&path, 0, e.to_string()))
}

pub fn write_node_labels(path: &Path, labels: &[(usize, bool)]) -> Result<()> {
    let mut s = String::new();
    for &(u, y) in labels {
        let _ = writeln!(s, "{u}\t{}", u8::from(y));
    }
    write_atomic(path, &s)
}

pub fn read_node_labels(path: &Path) -> Result<Vec<(usize, bool)>> {
    let text = read(path)?;
    lines(&text)
        .map(|(ln, line)| {
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 2 {
                return Err(parse_err(path, ln, "expected `node<TAB>label`"));
            }
            Ok((field(path, ln, parts[0], "node id")?, bit(path, ln, parts[1])?))
        })
        .collect()
}

pub fn write_pair_labels(path: &Path, labels: &[(usize, usize, bool)]) -> Result<()> {
    let mut s = String::new();
    for &(u, v, y) in labels {
        let _ = writeln!(s, "{u}\t{v}\t{}", u8::from(y));
    }
    write_atomic(path, &s)
}

pub fn read_pair_labels(path: &Path) -> Result<Vec<(usize, usize, bool)>> {
    let text = read(path)?;
    lines(&text)
        .map(|(ln, line)| {
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(parse_err(path, ln, "expected `u<TAB>v<TAB>label`"));
            }
            Ok((field(path, ln, parts[0], "node id")?, field(path, ln, parts[1], "node id")?, bit(path, ln, parts[2])?))
        })
        .collect()
}

pub fn write_mined_edges(path: &Path, edges: &[MinedEdge]) -> Result<()> {
    let mut s = String::new();
    for e in edges {
        let _ = writeln!(s, "{}\t{}\t{}", e.u, e.v, e.score);
    }
    write_atomic(path, &s)
}

pub fn read_mined_edges(path: &Path) -> Result<Vec<MinedEdge>> {
    let text = read(path)?;
    lines(&text)
        .map(|(ln, line)| {
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(parse_err(path, ln, "expected `u<TAB>v<TAB>score`"));
            }
            Ok(MinedEdge {
                u: field(path, ln, parts[0], "node id")?,
                v: field(path, ln, parts[1], "node id")?,
                score: finite(path, ln, parts[2])?,
            })
        })
        .collect()
}
