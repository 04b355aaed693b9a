//! Plain-text edge list, version 1.
//!
//! ```text
//! caperc-v1 n=<n> k=<k>
//! <color> <u> <v>
//! ...
//! ```
//!
//! ASCII, LF line endings, vertices 0-based, colors 1-based, `u < v`, lines
//! sorted by `(color, u, v)`. Writing a graph and reading it back yields the
//! identical graph.

use std::io::{BufRead, Write};

use super::{ColoredMultigraph, Edge, Vertex, MAX_COLORS};
use crate::error::{Error, Result};

pub const EDGELIST_MAGIC: &str = "caperc-v1";

pub fn write_edgelist<W: Write>(g: &ColoredMultigraph, sink: W) -> Result<()> {
    let mut w = std::io::BufWriter::new(sink);
    writeln!(w, "{EDGELIST_MAGIC} n={} k={}", g.n(), g.k())?;
    for (i, layer) in g.layers().iter().enumerate() {
        for &(u, v) in layer {
            writeln!(w, "{} {u} {v}", i + 1)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut parts = line.split(' ');
    if parts.next() != Some(EDGELIST_MAGIC) {
        return Err(parse_err(1, format!("malformed header, expected '{EDGELIST_MAGIC} n=<n> k=<k>'")));
    }
    let mut field = |key: &str| -> Result<usize> {
        parts
            .next()
            .and_then(|s| s.strip_prefix(key))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, format!("malformed header, missing '{key}<int>'")))
    };
    let n = field("n=")?;
    let k = field("k=")?;
    if parts.next().is_some() {
        return Err(parse_err(1, "malformed header, trailing fields"));
    }
    if k < 2 || k > MAX_COLORS {
        return Err(parse_err(1, format!("malformed header, k={k} not in 2..={MAX_COLORS}")));
    }
    if n > Vertex::MAX as usize {
        return Err(parse_err(1, format!("malformed header, n={n} too large")));
    }
    Ok((n, k))
}

pub fn read_edgelist<R: BufRead>(source: R) -> Result<ColoredMultigraph> {
    let mut lines = source.lines();
    let header = match lines.next() {
        Some(l) => l?,
        None => return Err(parse_err(1, "malformed header, empty input")),
    };
    let (n, k) = parse_header(&header)?;
    let mut layers: Vec<Vec<Edge>> = vec![Vec::new(); k];
    let mut origin: Vec<Vec<usize>> = vec![Vec::new(); k];

    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.is_empty() {
            return Err(parse_err(lineno, "empty line"));
        }
        let mut tok = line.split(' ');
        let mut num = |what: &str| -> Result<u64> {
            tok.next()
                .and_then(|s| s.parse::<u64>().ok())
                .ok_or_else(|| parse_err(lineno, format!("expected integer {what}")))
        };
        let color = num("color")?;
        let u = num("u")?;
        let v = num("v")?;
        if tok.next().is_some() {
            return Err(parse_err(lineno, "expected exactly 3 fields"));
        }
        if color == 0 || color > k as u64 {
            return Err(parse_err(lineno, format!("color {color} out of range 1..={k}")));
        }
        for x in [u, v] {
            if x >= n as u64 {
                return Err(parse_err(lineno, format!("vertex out of range: {x} >= n={n}")));
            }
        }
        if u >= v {
            return Err(parse_err(lineno, format!("expected u < v, got {u} {v}")));
        }
        layers[color as usize - 1].push((u as Vertex, v as Vertex));
        origin[color as usize - 1].push(lineno);
    }

    for (c, (layer, lines)) in layers.iter_mut().zip(&origin).enumerate() {
        if !layer.windows(2).all(|w| w[0] < w[1]) {
            let mut idx: Vec<usize> = (0..layer.len()).collect();
            idx.sort_by_key(|&i| (layer[i], lines[i]));
            if let Some(w) = idx.windows(2).find(|w| layer[w[0]] == layer[w[1]]) {
                let (u, v) = layer[w[1]];
                return Err(parse_err(
                    lines[w[1]],
                    format!("duplicate edge {u} {v} in color {}", c + 1),
                ));
            }
            *layer = idx.into_iter().map(|i| layer[i]).collect();
        }
    }
    Ok(ColoredMultigraph::from_canonical(n, layers))
}
