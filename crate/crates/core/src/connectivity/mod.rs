//! Connected components and color-avoiding components.
//!
//! A [`Labeling`] maps each vertex to the smallest vertex of its class, which
//! makes every partition canonical. [`ca_partition`] computes the classes of
//! the color-avoiding relation as the meet of the `k` partitions of the
//! color-deleted graphs; [`ca_oracle`] recomputes them from scratch by
//! transitive closure for small graphs.

mod ca;
mod oracle;
mod union_find;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Edge, Vertex};

pub use ca::{ca_partition, meet, write_partition_csv, CaPartition};
pub use oracle::{ca_oracle, oracle_self_test, SelfTest, DEFAULT_ORACLE_CAP};
pub use union_find::UnionFind;

/// A vertex partition where `comp_id[v]` is the minimum vertex of `v`'s class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    comp_id: Vec<Vertex>,
}

impl Labeling {
    /// Every vertex in its own class.
    pub fn singletons(n: usize) -> Self {
        Labeling {
            comp_id: (0..n as Vertex).collect(),
        }
    }

    /// Validates a raw label array.
    pub fn from_comp_ids(comp_id: Vec<Vertex>) -> Result<Self> {
        for (v, &c) in comp_id.iter().enumerate() {
            if c as usize > v {
                return Err(Error::Invariant(format!(
                    "comp_id[{v}] = {c} exceeds the vertex index"
                )));
            }
            if comp_id[c as usize] != c {
                return Err(Error::Invariant(format!(
                    "representative {c} of vertex {v} is not a fixed point"
                )));
            }
        }
        Ok(Labeling { comp_id })
    }

    pub(crate) fn from_comp_ids_unchecked(comp_id: Vec<Vertex>) -> Self {
        Labeling { comp_id }
    }

    pub fn n(&self) -> usize {
        self.comp_id.len()
    }

    #[inline]
    pub fn comp_id(&self, v: Vertex) -> Vertex {
        self.comp_id[v as usize]
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.comp_id
    }

    pub fn same(&self, u: Vertex, v: Vertex) -> bool {
        self.comp_id(u) == self.comp_id(v)
    }

    pub fn component_count(&self) -> usize {
        self.comp_id
            .iter()
            .enumerate()
            .filter(|&(v, &c)| c as usize == v)
            .count()
    }

    /// Class sizes indexed by vertex; non-zero only at representatives.
    pub fn sizes_by_rep(&self) -> Vec<u32> {
        let mut sizes = vec![0u32; self.n()];
        for &c in &self.comp_id {
            sizes[c as usize] += 1;
        }
        sizes
    }

    /// Class sizes, largest first.
    pub fn sizes_desc(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.sizes_by_rep().into_iter().filter(|&x| x > 0).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    pub fn max_size(&self) -> usize {
        self.sizes_by_rep().into_iter().max().unwrap_or(0) as usize
    }

    /// Members of each class keyed by representative.
    pub fn classes(&self) -> BTreeMap<Vertex, Vec<Vertex>> {
        let mut out: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        for (v, &c) in self.comp_id.iter().enumerate() {
            out.entry(c).or_default().push(v as Vertex);
        }
        out
    }

    /// True when every class of `self` lies inside a class of `coarser`.
    pub fn refines(&self, coarser: &Labeling) -> bool {
        self.n() == coarser.n()
            && self
                .comp_id
                .iter()
                .enumerate()
                .all(|(v, &c)| coarser.comp_id[v] == coarser.comp_id[c as usize])
    }
}

/// Connected components of the graph on `0..n` with the given edges.
/// Duplicate edges are harmless.
pub fn components<I>(n: usize, edges: I) -> Result<Labeling>
where
    I: IntoIterator<Item = Edge>,
{
    let mut uf = UnionFind::new(n);
    for (u, v) in edges {
        let hi = u.max(v);
        if hi as usize >= n {
            return Err(Error::VertexOutOfRange {
                vertex: hi as u64,
                n,
            });
        }
        uf.union(u, v);
    }
    Ok(labeling_from_union_find(&mut uf))
}

/// Converts union-find roots to min-vertex representatives in one ascending
/// pass: the first vertex seen for a root is the smallest.
pub(crate) fn labeling_from_union_find(uf: &mut UnionFind) -> Labeling {
    const UNSET: Vertex = Vertex::MAX;
    let n = uf.len();
    let mut min_of_root = vec![UNSET; n];
    let mut comp_id = vec![0; n];
    for v in 0..n as Vertex {
        let r = uf.find(v) as usize;
        if min_of_root[r] == UNSET {
            min_of_root[r] = v;
        }
        comp_id[v as usize] = min_of_root[r];
    }
    Labeling { comp_id }
}
