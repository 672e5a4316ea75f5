//! Line-oriented text formats.
//!
//! * graph: header `N <node_count>`, then one `i j w` line per edge
//! * signal: one `i v` line per node
//! * partition: one `i c` line per node (`c` is a 0-based cluster index)
//! * node set: one node id per line
//!
//! Blank lines and lines starting with `#` are ignored. Every parse error
//! carries the 1-based line number it was found on.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::graph::{validate_graph, Graph, GraphError, GraphSignal, NodeId, Partition};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: GraphError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            None
        } else {
            Some((k + 1, l.split_whitespace().collect()))
        }
    })
}

fn field<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, FormatError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from `{tok}`")))
}

pub fn parse_graph(text: &str) -> Result<Graph, FormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing `N <count>` header"))?;
    if header.len() != 2 || header[0] != "N" {
        return Err(parse_err(hline, "expected header `N <node_count>`"));
    }
    let n: usize = field(hline, header[1], "node count")?;
    if n == 0 {
        return Err(FormatError::Invalid {
            line: hline,
            source: GraphError::Empty,
        });
    }

    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    let mut line_of = Vec::new();
    for (line, toks) in lines {
        if toks.len() != 3 {
            return Err(parse_err(line, "expected `i j w`"));
        }
        let i: NodeId = field(line, toks[0], "node id")?;
        let j: NodeId = field(line, toks[1], "node id")?;
        let w: f64 = field(line, toks[2], "weight")?;
        // single-edge validation so the error can name its line
        validate_graph(&[(i, j)], &[w], n).map_err(|source| FormatError::Invalid { line, source })?;
        pairs.push((i, j));
        weights.push(w);
        line_of.push(line);
    }
    validate_graph(&pairs, &weights, n).map_err(|err| match err {
        GraphError::DuplicateEdge(a, b) => {
            // report the second occurrence
            let line = pairs
                .iter()
                .enumerate()
                .filter(|(_, &(i, j))| (i.min(j), i.max(j)) == (a, b))
                .nth(1)
                .map_or(0, |(k, _)| line_of[k]);
            FormatError::Invalid { line, source: err }
        }
        other => FormatError::Graph(other),
    })
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("N {}\n", g.node_count());
    for (e, w) in g.edges().iter().zip(g.weights()) {
        writeln!(out, "{} {} {}", e.lo, e.hi, w).unwrap();
    }
    out
}

/// Parses `i <value>` lines requiring each of `0..n` exactly once.
fn parse_per_node<T: std::str::FromStr + Copy>(
    text: &str,
    n: usize,
    what: &str,
) -> Result<Vec<T>, FormatError> {
    let mut slots: Vec<Option<T>> = vec![None; n];
    for (line, toks) in content_lines(text) {
        if toks.len() != 2 {
            return Err(parse_err(line, format!("expected `i {what}`")));
        }
        let i: NodeId = field(line, toks[0], "node id")?;
        let v: T = field(line, toks[1], what)?;
        if i >= n {
            return Err(FormatError::Invalid {
                line,
                source: GraphError::NodeOutOfRange { node: i, n },
            });
        }
        if slots[i].is_some() {
            return Err(parse_err(line, format!("node {i} listed twice")));
        }
        slots[i] = Some(v);
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| parse_err(0, format!("node {i} has no {what}"))))
        .collect()
}

pub fn parse_signal(text: &str, n: usize) -> Result<GraphSignal, FormatError> {
    let values: Vec<f64> = parse_per_node(text, n, "value")?;
    Ok(GraphSignal::new(values)?)
}

pub fn write_signal(x: &GraphSignal) -> String {
    let mut out = String::new();
    for (i, v) in x.values().iter().enumerate() {
        writeln!(out, "{i} {v}").unwrap();
    }
    out
}

pub fn parse_partition(text: &str, n: usize) -> Result<Partition, FormatError> {
    let labels: Vec<usize> = parse_per_node(text, n, "cluster")?;
    Ok(Partition::from_assignment(&labels)?)
}

pub fn write_partition(f: &Partition) -> String {
    let mut out = String::new();
    for (i, c) in f.assignment().iter().enumerate() {
        writeln!(out, "{i} {c}").unwrap();
    }
    out
}

/// Parses a node set; ids must be in `0..n` and distinct. Output is sorted.
pub fn parse_node_set(text: &str, n: usize) -> Result<Vec<NodeId>, FormatError> {
    let mut seen = vec![false; n];
    let mut nodes = Vec::new();
    for (line, toks) in content_lines(text) {
        if toks.len() != 1 {
            return Err(parse_err(line, "expected one node id per line"));
        }
        let i: NodeId = field(line, toks[0], "node id")?;
        if i >= n {
            return Err(FormatError::Invalid {
                line,
                source: GraphError::NodeOutOfRange { node: i, n },
            });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(parse_err(line, format!("node {i} listed twice")));
        }
        nodes.push(i);
    }
    nodes.sort_unstable();
    Ok(nodes)
}

pub fn write_node_set(nodes: &[NodeId]) -> String {
    nodes.iter().map(|i| format!("{i}\n")).collect()
}

pub fn read_graph(path: &Path) -> Result<Graph, FormatError> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn read_signal(path: &Path, n: usize) -> Result<GraphSignal, FormatError> {
    parse_signal(&fs::read_to_string(path)?, n)
}

pub fn read_partition(path: &Path, n: usize) -> Result<Partition, FormatError> {
    parse_partition(&fs::read_to_string(path)?, n)
}

pub fn read_node_set(path: &Path, n: usize) -> Result<Vec<NodeId>, FormatError> {
    parse_node_set(&fs::read_to_string(path)?, n)
}
