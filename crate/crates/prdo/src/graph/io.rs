//! Edge-list and DIMACS `.gr` readers and writers.
//!
//! Edge list: a header line `n m` followed by `m` lines `u v w`, 0-indexed.
//! DIMACS: `p sp n m` and `a u v w` lines with 1-indexed ids, `c` comments.
//! Weights are written in shortest round-trip form, so save then load is exact.

use std::io::{BufRead, BufReader, Read, Write};

use super::{GraphError, VertexId, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    EdgeList,
    DimacsGr,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "edge-list" | "edgelist" | "txt" => Ok(Format::EdgeList),
            "dimacs" | "dimacs-gr" | "gr" => Ok(Format::DimacsGr),
            other => Err(format!("unknown graph format {other:?}")),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GraphError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
}

pub fn load_graph<R: Read>(source: R, format: Format) -> Result<WeightedGraph, GraphError> {
    let reader = BufReader::new(source);
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<(VertexId, VertexId, f64)> = Vec::new();
    let mut last_line = 0;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut toks = line.split_whitespace();
        match format {
            Format::EdgeList => {
                if header.is_none() {
                    let n = field(toks.next(), lineno, "vertex count")?;
                    let m = field(toks.next(), lineno, "edge count")?;
                    header = Some((n, m));
                    continue;
                }
                let u: VertexId = field(toks.next(), lineno, "endpoint")?;
                let v: VertexId = field(toks.next(), lineno, "endpoint")?;
                let w: f64 = field(toks.next(), lineno, "weight")?;
                check_edge(header.unwrap().0, u, v, w, lineno)?;
                edges.push((u, v, w));
            }
            Format::DimacsGr => match toks.next() {
                Some("c") => {}
                Some("p") => {
                    let _kind: String = field(toks.next(), lineno, "problem kind")?;
                    let n = field(toks.next(), lineno, "vertex count")?;
                    let m = field(toks.next(), lineno, "arc count")?;
                    header = Some((n, m));
                }
                Some("a") => {
                    let Some((n, _)) = header else {
                        return Err(parse_err(lineno, "arc before problem line"));
                    };
                    let u: VertexId = field(toks.next(), lineno, "endpoint")?;
                    let v: VertexId = field(toks.next(), lineno, "endpoint")?;
                    let w: f64 = field(toks.next(), lineno, "weight")?;
                    if u == 0 || v == 0 {
                        return Err(parse_err(lineno, "DIMACS ids are 1-indexed"));
                    }
                    check_edge(n, u - 1, v - 1, w, lineno)?;
                    edges.push((u - 1, v - 1, w));
                }
                Some(other) => return Err(parse_err(lineno, format!("unknown line kind {other:?}"))),
                None => {}
            },
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(last_line.max(1), "missing header"))?;
    if edges.len() != m {
        return Err(parse_err(last_line, format!("header declares {m} edges, found {}", edges.len())));
    }
    WeightedGraph::new(n, edges)
}

fn check_edge(n: usize, u: VertexId, v: VertexId, w: f64, line: usize) -> Result<(), GraphError> {
    if u as usize >= n || v as usize >= n {
        return Err(parse_err(line, format!("vertex out of range for n={n}")));
    }
    if u == v {
        return Err(parse_err(line, format!("self-loop at vertex {u}")));
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(parse_err(line, format!("non-positive or non-finite weight {w}")));
    }
    Ok(())
}

pub fn save_graph<W: Write>(g: &WeightedGraph, mut out: W, format: Format) -> std::io::Result<()> {
    match format {
        Format::EdgeList => {
            writeln!(out, "{} {}", g.n(), g.m())?;
            for e in g.edges() {
                writeln!(out, "{} {} {:?}", e.u, e.v, e.w)?;
            }
        }
        Format::DimacsGr => {
            writeln!(out, "p sp {} {}", g.n(), g.m())?;
            for e in g.edges() {
                writeln!(out, "a {} {} {:?}", e.u + 1, e.v + 1, e.w)?;
            }
        }
    }
    Ok(())
}
