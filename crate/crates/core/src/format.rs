//! Plain-text instance and certificate formats.
//!
//! Instance:
//!
//! ```text
//! # comment lines start with '#'
//! n m
//! u v w        (m lines, 0 <= u < v < w < n)
//! ```
//!
//! Certificate:
//!
//! ```text
//! perfect s    (or: partial s)
//! a b c d | x,y,z x,y,w   (s lines: four vertices, then the two witness edges)
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hypergraph::{DCopy, Hypergraph3, Tiling, Triple};

fn perr<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .or_else(|_| perr(line, format!("expected a non-negative integer, found {tok:?}")))
}

pub fn write_instance(g: &Hypergraph3) -> String {
    let mut out = String::with_capacity(16 + g.edge_count() * 12);
    let _ = writeln!(out, "{} {}", g.n(), g.edge_count());
    for [a, b, c] in g.edges() {
        let _ = writeln!(out, "{a} {b} {c}");
    }
    out
}

pub fn parse_instance(text: &str) -> Result<Hypergraph3> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return perr(1, "missing header line `n m`");
    };
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return perr(hl, "header must be `n m`");
    }
    let n = parse_usize(hl, toks[0])?;
    let m = parse_usize(hl, toks[1])?;
    let mut triples = Vec::with_capacity(m);
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return perr(ln, "edge line must hold exactly three vertices");
        }
        let t = [
            parse_usize(ln, toks[0])?,
            parse_usize(ln, toks[1])?,
            parse_usize(ln, toks[2])?,
        ];
        if !(t[0] < t[1] && t[1] < t[2]) {
            return perr(ln, format!("edge {t:?} is not strictly increasing"));
        }
        if t[2] >= n {
            return perr(ln, format!("edge {t:?} has a vertex >= n = {n}"));
        }
        triples.push(t);
    }
    if triples.len() != m {
        return perr(hl, format!("header announces {m} edges, found {}", triples.len()));
    }
    Hypergraph3::build(n, triples)
}

/// A parsed tiling certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// Whether the header claims a perfect tiling.
    pub claims_perfect: bool,
    pub tiling: Tiling,
}

fn join_triple(t: &Triple) -> String {
    format!("{},{},{}", t[0], t[1], t[2])
}

/// Serialises `t`; the header says `perfect` iff the copies cover exactly
/// `0..n`.
pub fn write_certificate(t: &Tiling, n: usize) -> String {
    let perfect = 4 * t.len() == n && t.covered_set(n).len() == n;
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", if perfect { "perfect" } else { "partial" }, t.len());
    for d in t.copies() {
        let [a, b, c, e] = d.vertices();
        let [x, y] = d.edges();
        let _ = writeln!(out, "{a} {b} {c} {e} | {} {}", join_triple(&x), join_triple(&y));
    }
    out
}

fn parse_triple(line: usize, tok: &str) -> Result<Triple> {
    let parts: Vec<&str> = tok.split(',').collect();
    if parts.len() != 3 {
        return perr(
            line,
            format!("witness edge {tok:?} must be three comma-separated vertices"),
        );
    }
    Ok([
        parse_usize(line, parts[0])?,
        parse_usize(line, parts[1])?,
        parse_usize(line, parts[2])?,
    ])
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return perr(1, "missing header `perfect s` or `partial s`");
    };
    let toks: Vec<&str> = header.split_whitespace().collect();
    let claims_perfect = match toks.as_slice() {
        ["perfect", _] => true,
        ["partial", _] => false,
        _ => return perr(hl, "header must be `perfect s` or `partial s`"),
    };
    let s = parse_usize(hl, toks[1])?;
    let mut copies = Vec::with_capacity(s);
    for (ln, l) in lines {
        let Some((verts, edges)) = l.split_once('|') else {
            return perr(ln, "copy line must be `a b c d | e1 e2`");
        };
        let vs: Vec<usize> = verts
            .split_whitespace()
            .map(|t| parse_usize(ln, t))
            .collect::<Result<_>>()?;
        if vs.len() != 4 {
            return perr(ln, "a copy lists exactly four vertices");
        }
        let es: Vec<&str> = edges.split_whitespace().collect();
        if es.len() != 2 {
            return perr(ln, "a copy lists exactly two witness edges");
        }
        let d = DCopy::from_edges(parse_triple(ln, es[0])?, parse_triple(ln, es[1])?)
            .or_else(|e| perr(ln, e.to_string()))?;
        let mut sorted = vs.clone();
        sorted.sort_unstable();
        if sorted != d.vertices() {
            return perr(ln, format!("vertices {vs:?} do not match the witness edges"));
        }
        copies.push(d);
    }
    if copies.len() != s {
        return perr(hl, format!("header announces {s} copies, found {}", copies.len()));
    }
    Ok(Certificate {
        claims_perfect,
        tiling: Tiling::new(copies),
    })
}
