//! Text graph formats.
//!
//! * DIMACS style: `p ocm <n> <m>` header, `a <u> <v> <w>` arcs with 1-based
//!   vertices, `c ...` comments.
//! * Plain edge list: `<u> <v> <w>` per line with 0-based vertices, `n`
//!   inferred from the largest endpoint, `#` comments.
//!
//! Weights are decimal integers or decimals. When every weight is integral the
//! graph is eligible for integer-exact mode.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::scalar::{is_integral_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RawWeight {
    Int(i64),
    Decimal(f64),
}

impl RawWeight {
    fn parse(tok: &str) -> Option<Self> {
        if let Ok(i) = tok.parse::<i64>() {
            return Some(RawWeight::Int(i));
        }
        let f: f64 = tok.parse().ok()?;
        if !f.is_finite() {
            return None;
        }
        if is_integral_f64(f) {
            Some(RawWeight::Int(f as i64))
        } else {
            Some(RawWeight::Decimal(f))
        }
    }

    pub fn is_integral(&self) -> bool {
        matches!(self, RawWeight::Int(_))
    }

    pub fn to_scalar<W: Scalar>(self) -> Option<W> {
        match self {
            RawWeight::Int(i) => W::from_i64(i),
            RawWeight::Decimal(f) => W::from_f64(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Dimacs,
    EdgeList,
}

/// A parsed graph file before the scalar type is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex, RawWeight)>,
    pub format: Format,
}

impl EdgeList {
    /// True when integer-exact mode applies.
    pub fn all_integral(&self) -> bool {
        self.edges.iter().all(|(_, _, w)| w.is_integral())
    }

    pub fn to_graph<W: Scalar>(&self) -> Result<Graph<W>> {
        let edges = self
            .edges
            .iter()
            .map(|&(u, v, w)| {
                w.to_scalar::<W>()
                    .map(|w| (u, v, w))
                    .ok_or_else(|| Error::InvalidInput(format!("weight {w:?} not representable")))
            })
            .collect::<Result<Vec<_>>>()?;
        Graph::from_edges(self.n, &edges)
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses either format; DIMACS is selected when a `p` line is present.
pub fn parse_graph(text: &str) -> Result<EdgeList> {
    let is_dimacs = text.lines().any(|l| {
        let t = l.trim_start();
        t.starts_with("p ") || t == "p"
    });
    if is_dimacs {
        parse_dimacs(text)
    } else {
        parse_edge_list(text)
    }
}

pub fn parse_dimacs(text: &str) -> Result<EdgeList> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.first() {
            None => continue,
            Some(&"c") => continue,
            Some(&"p") => {
                if header.is_some() {
                    return Err(perr(line, "duplicate problem line"));
                }
                if toks.len() != 4 {
                    return Err(perr(line, "expected `p ocm <n> <m>`"));
                }
                let n = toks[2]
                    .parse()
                    .map_err(|_| perr(line, "bad vertex count"))?;
                let m = toks[3].parse().map_err(|_| perr(line, "bad edge count"))?;
                header = Some((n, m));
            }
            Some(&"a") => {
                let (n, _) = header.ok_or_else(|| perr(line, "arc before problem line"))?;
                if toks.len() != 4 {
                    return Err(perr(line, "expected `a <u> <v> <w>`"));
                }
                let u: usize = toks[1]
                    .parse()
                    .map_err(|_| perr(line, "bad source vertex"))?;
                let v: usize = toks[2]
                    .parse()
                    .map_err(|_| perr(line, "bad target vertex"))?;
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(perr(line, format!("vertex out of range 1..={n}")));
                }
                let w = RawWeight::parse(toks[3]).ok_or_else(|| perr(line, "bad weight"))?;
                edges.push((u - 1, v - 1, w));
            }
            Some(other) => return Err(perr(line, format!("unknown line type `{other}`"))),
        }
    }
    let (n, m) = header.ok_or_else(|| perr(0, "missing problem line"))?;
    if edges.len() != m {
        return Err(perr(
            0,
            format!("header announces {m} arcs, found {}", edges.len()),
        ));
    }
    Ok(EdgeList {
        n,
        edges,
        format: Format::Dimacs,
    })
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(perr(line, "expected `<u> <v> <w>`"));
        }
        let u: usize = toks[0]
            .parse()
            .map_err(|_| perr(line, "bad source vertex"))?;
        let v: usize = toks[1]
            .parse()
            .map_err(|_| perr(line, "bad target vertex"))?;
        let w = RawWeight::parse(toks[2]).ok_or_else(|| perr(line, "bad weight"))?;
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    Ok(EdgeList {
        n,
        edges,
        format: Format::EdgeList,
    })
}

/// Serializes `g` as a plain edge list, preceded by `# ` comment lines.
pub fn write_edge_list<W: Scalar>(g: &Graph<W>, comments: &[String]) -> String {
    let mut out = String::with_capacity(g.edge_count() * 12);
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    for (u, v, w) in g.edges() {
        let _ = writeln!(out, "{u} {v} {}", w.render());
    }
    out
}

/// Serializes `g` in the DIMACS-style format.
pub fn write_dimacs<W: Scalar>(g: &Graph<W>, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    let _ = writeln!(out, "p ocm {} {}", g.vertex_count(), g.edge_count());
    for (u, v, w) in g.edges() {
        let _ = writeln!(out, "a {} {} {}", u + 1, v + 1, w.render());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn dimacs_is_one_based() {
        let el = parse_graph("c two-cycle\np ocm 2 2\na 1 2 2\na 2 1 4\n").unwrap();
        assert_eq!(el.format, Format::Dimacs);
        assert_eq!(el.n, 2);
        assert_eq!(
            el.edges,
            vec![(0, 1, RawWeight::Int(2)), (1, 0, RawWeight::Int(4))]
        );
        assert!(el.all_integral());
    }

    #[test]
    fn edge_list_infers_n_and_skips_comments() {
        let el = parse_graph("# header\n0 3 1.5\n\n2 0 -2 # trailing\n").unwrap();
        assert_eq!(el.n, 4);
        assert!(!el.all_integral());
        let g = el.to_graph::<f64>().unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.weight(0), 1.5);
    }

    #[test]
    fn integral_decimals_enable_exact_mode() {
        let el = parse_graph("0 1 3.0\n1 0 -1\n").unwrap();
        assert!(el.all_integral());
        let g = el.to_graph::<Rational>().unwrap();
        assert_eq!(g.weight(0), Rational::from_integer(3));
    }

    #[test]
    fn parse_errors_report_line_numbers() {
        let err = parse_graph("0 1 2\n0 x 2\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                msg: "bad target vertex".into()
            }
        );
        let err = parse_graph("p ocm 2 1\na 1 3 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_graph("p ocm 2 2\na 1 2 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn writers_round_trip() {
        let g = Graph::<Rational>::from_edges(
            3,
            &[
                (0, 1, Rational::from_integer(2)),
                (1, 2, Rational::from_integer(-4)),
                (2, 0, Rational::from_integer(7)),
            ],
        )
        .unwrap();
        let text = write_edge_list(&g, &["demo".to_string()]);
        assert_eq!(
            parse_graph(&text).unwrap().to_graph::<Rational>().unwrap(),
            g
        );
        let text = write_dimacs(&g, &[]);
        assert_eq!(
            parse_graph(&text).unwrap().to_graph::<Rational>().unwrap(),
            g
        );
    }
}
