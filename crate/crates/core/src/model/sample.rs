use rand::Rng;

use super::{ColoredMultigraph, Edge, ModelParams, Vertex};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, StreamTag};

/// Number of failures before the first success of a Bernoulli(p) sequence,
/// drawn by inverting the geometric CDF. `ln_q` is `ln(1 - p)`.
#[inline]
pub fn geometric_skip<R: Rng + ?Sized>(rng: &mut R, ln_q: f64) -> u64 {
    // u in (0, 1]
    let u = 1.0 - rng.random::<f64>();
    let x = (u.ln() / ln_q).floor();
    // `as` saturates, which is what we want for astronomically long skips.
    x as u64
}

/// Samples G(n, p) with the pairs `(u, v)`, `u < v`, visited in lexicographic
/// order and jumped over by geometric skips. Expected time O(n + m); the
/// returned list is already sorted.
pub fn sample_layer(n: usize, p: f64, seed: u64) -> Vec<Edge> {
    assert!((0.0..=1.0).contains(&p), "edge probability {p} not in [0, 1]");
    if n < 2 || p == 0.0 {
        return Vec::new();
    }
    let n64 = n as u64;
    if p == 1.0 {
        let mut all = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n as Vertex {
            for v in u + 1..n as Vertex {
                all.push((u, v));
            }
        }
        return all;
    }

    let pairs = n64 * (n64 - 1) / 2;
    let expected = (pairs as f64 * p) as usize;
    let mut edges = Vec::with_capacity(expected + expected / 64 + 16);
    let mut rng = stream(seed);
    let ln_q = (-p).ln_1p();

    // (u, v) is the last visited pair; v == u means "before (u, u + 1)".
    let mut u = 0u64;
    let mut v = 0u64;
    loop {
        let skip = geometric_skip(&mut rng, ln_q);
        v = v.saturating_add(skip).saturating_add(1);
        while v >= n64 {
            let over = v - n64;
            u += 1;
            if u >= n64 - 1 {
                return edges;
            }
            v = (u + 1).saturating_add(over);
        }
        edges.push((u as Vertex, v as Vertex));
    }
}

/// Samples every layer independently; layer `i` uses the stream
/// `derive_seed(seed, i, Layer)`.
pub fn sample_model(params: &ModelParams, seed: u64) -> Result<ColoredMultigraph> {
    let n = params.n();
    let mut layers = Vec::with_capacity(params.k());
    for i in 1..=params.k() {
        let p = params.edge_probability(i);
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "edge probability {p} of color {i} outside [0, 1]"
            )));
        }
        layers.push(sample_layer(n, p, layer_seed(seed, i)));
    }
    Ok(ColoredMultigraph::from_canonical(n, layers))
}

pub(crate) fn layer_seed(seed: u64, color: usize) -> u64 {
    derive_seed(seed, color as u64, StreamTag::Layer)
}
