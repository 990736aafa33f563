//! Plain-text edge lists: a header line `n m`, then `m` lines `u v`.
//! Lines starting with `#` are comments.

use std::fmt::Write as _;

use super::{Graph, GraphError, Vertex};

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize), GraphError> {
    let mut fields = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize, GraphError> {
        let tok = fields.next().ok_or_else(|| GraphError::Parse { line: lineno, msg: format!("missing {what}") })?;
        tok.parse()
            .map_err(|_| GraphError::Parse { line: lineno, msg: format!("`{tok}` is not a non-negative integer") })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if fields.next().is_some() {
        return Err(GraphError::Parse { line: lineno, msg: "expected exactly two fields".into() });
    }
    Ok((a, b))
}

pub fn read_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(GraphError::Parse { line: 0, msg: "missing `n m` header".into() })?;
    let (n, m) = parse_pair(header, hline)?;
    let mut edges: Vec<(Vertex, Vertex)> = Vec::with_capacity(m);
    for (lineno, line) in lines {
        let (u, v) = parse_pair(line, lineno)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if u >= n || v >= n {
            return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n });
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(GraphError::Parse {
            line: hline,
            msg: format!("header declares {m} edges but {} were listed", edges.len()),
        });
    }
    Graph::from_edges(n, edges)
}

/// Normalized edge list: header, then edges in id order with `u < v`.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(16 + g.m() * 8);
    let _ = writeln!(out, "{} {}", g.n(), g.m());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
