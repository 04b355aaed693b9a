//! The k-layer colored multigraph and its parameters.
//!
//! Vertices are 0-based (`0..n`). Colors are 1-based (`1..=k`) everywhere in
//! the public API, matching the edge-list format.

mod edgelist;
mod sample;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use edgelist::{read_edgelist, write_edgelist, EDGELIST_MAGIC};
pub use sample::{geometric_skip, sample_layer, sample_model};
pub(crate) use sample::layer_seed;

pub type Vertex = u32;
/// An undirected edge stored as `(u, v)` with `u < v`.
pub type Edge = (Vertex, Vertex);

/// Largest supported color count (colors live in a `u64` bitmask).
pub const MAX_COLORS: usize = 64;

/// Vertex count, per-color intensities and the quantities derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    n: usize,
    lambdas: Vec<f64>,
    total: f64,
    lambda_star: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    lambdas: Vec<f64>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.n, raw.lambdas)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            n: p.n,
            lambdas: p.lambdas,
        }
    }
}

impl ModelParams {
    /// Validates and normalizes parameters. Intensities may be given in any
    /// order; they are stored non-increasing.
    pub fn new(n: usize, mut lambdas: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if n > Vertex::MAX as usize {
            return Err(Error::InvalidParams(format!(
                "n={n} exceeds the supported maximum {}",
                Vertex::MAX
            )));
        }
        let k = lambdas.len();
        if k < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 colors, got {k}"
            )));
        }
        if k > MAX_COLORS {
            return Err(Error::InvalidParams(format!(
                "at most {MAX_COLORS} colors are supported, got {k}"
            )));
        }
        for (i, &l) in lambdas.iter().enumerate() {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "lambda_{} = {l} must be positive and finite",
                    i + 1
                )));
            }
            if l > n as f64 {
                return Err(Error::InvalidParams(format!(
                    "lambda_{} = {l} exceeds n = {n} (edge probability above 1)",
                    i + 1
                )));
            }
        }
        lambdas.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = lambdas.iter().sum();
        let lambda_star = lambdas.iter().map(|l| total - l).collect();
        Ok(ModelParams {
            n,
            lambdas,
            total,
            lambda_star,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    /// Intensities, non-increasing.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Intensity of color `i` (1-based).
    pub fn lambda(&self, i: usize) -> f64 {
        self.lambdas[i - 1]
    }

    /// Sum of all intensities.
    pub fn total_intensity(&self) -> f64 {
        self.total
    }

    /// Intensity left after deleting one color, `total - lambda_i`,
    /// non-decreasing in `i`.
    pub fn lambda_star(&self) -> &[f64] {
        &self.lambda_star
    }

    /// Intensity left after deleting the colors in `colors`.
    pub fn lambda_star_of(&self, colors: ColorSet) -> f64 {
        self.total
            - colors
                .iter()
                .filter(|&c| c <= self.k())
                .map(|c| self.lambda(c))
                .sum::<f64>()
    }

    /// Edge probability of layer `i` (1-based).
    pub fn edge_probability(&self, i: usize) -> f64 {
        self.lambda(i) / self.n as f64
    }
}

/// A subset of the colors `1..=k`. Serializes as the sorted list of colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct ColorSet(u64);

impl From<ColorSet> for Vec<usize> {
    fn from(c: ColorSet) -> Self {
        c.iter().collect()
    }
}

impl TryFrom<Vec<usize>> for ColorSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        ColorSet::from_colors(&v)
    }
}

impl ColorSet {
    pub const fn empty() -> Self {
        ColorSet(0)
    }

    pub fn full(k: usize) -> Self {
        assert!(k <= MAX_COLORS);
        if k == MAX_COLORS {
            ColorSet(u64::MAX)
        } else {
            ColorSet((1u64 << k) - 1)
        }
    }

    /// The set `{color}`; panics unless `1 <= color <= 64`.
    pub fn single(color: usize) -> Self {
        assert!((1..=MAX_COLORS).contains(&color), "color {color} out of range");
        ColorSet(1u64 << (color - 1))
    }

    pub fn from_colors(colors: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &c in colors {
            if !(1..=MAX_COLORS).contains(&c) {
                return Err(Error::InvalidParams(format!("color {c} out of range")));
            }
            bits |= 1u64 << (c - 1);
        }
        Ok(ColorSet(bits))
    }

    pub const fn from_bits(bits: u64) -> Self {
        ColorSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, color: usize) -> bool {
        (1..=MAX_COLORS).contains(&color) && self.0 & (1u64 << (color - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// `{1..k} \ self`.
    pub fn complement(self, k: usize) -> Self {
        ColorSet(!self.0 & Self::full(k).0)
    }

    /// Checks that every member is a valid color for `k` colors.
    pub fn check(self, k: usize) -> Result<()> {
        if self.0 & !Self::full(k).0 != 0 {
            return Err(Error::InvalidParams(format!(
                "color set {self} is not a subset of 1..={k}"
            )));
        }
        Ok(())
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..=MAX_COLORS).filter(move |&c| self.contains(c))
    }
}

impl fmt::Display for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// `k` simple edge sets over the shared vertex set `0..n`. The same pair may
/// appear in several layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredMultigraph {
    n: usize,
    layers: Vec<Vec<Edge>>,
}

impl ColoredMultigraph {
    /// Builds a graph from per-color edge lists (index 0 holds color 1).
    /// Each list is canonicalized (endpoints ordered, sorted); self-loops,
    /// out-of-range endpoints and duplicates within a layer are rejected.
    pub fn from_layers(n: usize, layers: Vec<Vec<Edge>>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 colors, got {}",
                layers.len()
            )));
        }
        if layers.len() > MAX_COLORS {
            return Err(Error::InvalidParams(format!(
                "at most {MAX_COLORS} colors are supported"
            )));
        }
        let mut canon = Vec::with_capacity(layers.len());
        for (i, mut layer) in layers.into_iter().enumerate() {
            for e in layer.iter_mut() {
                if e.0 == e.1 {
                    return Err(Error::InvalidParams(format!(
                        "self-loop at vertex {} in color {}",
                        e.0,
                        i + 1
                    )));
                }
                if e.0 > e.1 {
                    *e = (e.1, e.0);
                }
                if e.1 as usize >= n {
                    return Err(Error::VertexOutOfRange {
                        vertex: e.1 as u64,
                        n,
                    });
                }
            }
            layer.sort_unstable();
            if let Some(w) = layer.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidParams(format!(
                    "duplicate edge ({}, {}) in color {}",
                    w[0].0,
                    w[0].1,
                    i + 1
                )));
            }
            canon.push(layer);
        }
        Ok(ColoredMultigraph { n, layers: canon })
    }

    /// Trusted constructor for layers already in canonical form.
    pub(crate) fn from_canonical(n: usize, layers: Vec<Vec<Edge>>) -> Self {
        debug_assert!(layers
            .iter()
            .all(|l| l.windows(2).all(|w| w[0] < w[1]) && l.iter().all(|e| e.0 < e.1)));
        ColoredMultigraph { n, layers }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.layers.len()
    }

    /// Edges of color `i` (1-based), sorted.
    pub fn layer(&self, i: usize) -> &[Edge] {
        &self.layers[i - 1]
    }

    pub fn layers(&self) -> &[Vec<Edge>] {
        &self.layers
    }

    pub fn edge_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Streams the edges of every layer in `colors`, with multiplicity.
    /// Cheaper than [`Self::union_view`] when multiplicity does not matter.
    pub fn edges_in(&self, colors: ColorSet) -> impl Iterator<Item = Edge> + '_ {
        self.layers
            .iter()
            .enumerate()
            .filter(move |(i, _)| colors.contains(i + 1))
            .flat_map(|(_, l)| l.iter().copied())
    }

    /// Simple edge set of the union of the layers in `colors`, sorted.
    pub fn union_view(&self, colors: ColorSet) -> Vec<Edge> {
        let selected: Vec<&Vec<Edge>> = self
            .layers
            .iter()
            .enumerate()
            .filter(|(i, _)| colors.contains(i + 1))
            .map(|(_, l)| l)
            .collect();
        match selected.as_slice() {
            [] => Vec::new(),
            [one] => (*one).clone(),
            _ => {
                let mut all: Vec<Edge> =
                    Vec::with_capacity(selected.iter().map(|l| l.len()).sum());
                for l in selected {
                    all.extend_from_slice(l);
                }
                all.sort_unstable();
                all.dedup();
                all
            }
        }
    }

    /// Simple edge set of the union of the layers not in `colors`.
    pub fn complement_view(&self, colors: ColorSet) -> Vec<Edge> {
        self.union_view(colors.complement(self.k()))
    }
}
