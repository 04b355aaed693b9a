//! Component statistics: size histograms, tree and cyclic component counts,
//! small color-avoiding class counts, and black-vertex thresholds.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::connectivity::{CaPartition, Labeling};
use crate::error::{Error, Result};
use crate::model::{Edge, Vertex};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentCensus {
    pub n: usize,
    /// size -> number of components of that size
    pub size_hist: BTreeMap<usize, usize>,
    pub max_size: usize,
    /// Size of the second largest component (0 if there is only one).
    pub second_size: usize,
    /// size -> number of tree components (size - 1 edges); has an entry for
    /// every size present in `size_hist`, possibly zero.
    pub tree_counts: BTreeMap<usize, usize>,
    pub cyclic_components: usize,
    pub cyclic_vertices: usize,
}

impl ComponentCensus {
    pub fn component_count(&self) -> usize {
        self.size_hist.values().sum()
    }

    pub fn tree_count(&self, s: usize) -> usize {
        self.tree_counts.get(&s).copied().unwrap_or(0)
    }

    pub fn components_of_size(&self, s: usize) -> usize {
        self.size_hist.get(&s).copied().unwrap_or(0)
    }
}

/// Census of the components of a simple graph. `labeling` must be the
/// component labeling of `edges`; an edge joining two classes is an error.
pub fn census<'a, I>(labeling: &Labeling, edges: I) -> Result<ComponentCensus>
where
    I: IntoIterator<Item = &'a Edge>,
{
    let n = labeling.n();
    let sizes = labeling.sizes_by_rep();
    let mut edge_counts = vec![0u64; n];
    for &(u, v) in edges {
        if u.max(v) as usize >= n {
            return Err(Error::VertexOutOfRange {
                vertex: u.max(v) as u64,
                n,
            });
        }
        let c = labeling.comp_id(u);
        if c != labeling.comp_id(v) {
            return Err(Error::InconsistentLabeling { u, v });
        }
        edge_counts[c as usize] += 1;
    }

    let mut size_hist = BTreeMap::new();
    let mut tree_counts = BTreeMap::new();
    let mut cyclic_components = 0;
    let mut cyclic_vertices = 0;
    let (mut first, mut second) = (0usize, 0usize);
    for (rep, &s) in sizes.iter().enumerate() {
        if s == 0 {
            continue;
        }
        let s = s as usize;
        *size_hist.entry(s).or_insert(0) += 1;
        let trees = tree_counts.entry(s).or_insert(0);
        if edge_counts[rep] == s as u64 - 1 {
            *trees += 1;
        } else {
            cyclic_components += 1;
            cyclic_vertices += s;
        }
        if s > first {
            second = first;
            first = s;
        } else if s > second {
            second = s;
        }
    }
    Ok(ComponentCensus {
        n,
        size_hist,
        max_size: first,
        second_size: second,
        tree_counts,
        cyclic_components,
        cyclic_vertices,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaCensus {
    pub n: usize,
    pub size_hist: BTreeMap<usize, usize>,
    pub max_ca_size: usize,
    /// l -> number of classes of size exactly l, for l in 2..=k.
    pub small_counts: BTreeMap<usize, usize>,
}

impl CaCensus {
    /// Number of classes of size exactly `l` (for `l` in `2..=k`).
    pub fn count(&self, l: usize) -> usize {
        self.small_counts.get(&l).copied().unwrap_or(0)
    }
}

pub fn ca_census(p: &CaPartition, k: usize) -> CaCensus {
    let mut size_hist = BTreeMap::new();
    for s in p.labeling.sizes_by_rep() {
        if s > 0 {
            *size_hist.entry(s as usize).or_insert(0) += 1;
        }
    }
    let max_ca_size = size_hist.keys().next_back().copied().unwrap_or(0);
    let small_counts = (2..=k)
        .map(|l| (l, size_hist.get(&l).copied().unwrap_or(0)))
        .collect();
    CaCensus {
        n: p.n(),
        size_hist,
        max_ca_size,
        small_counts,
    }
}

/// Independent Bernoulli(q) vertex marks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackColoring {
    pub q: f64,
    pub seed: u64,
    pub black: Vec<bool>,
}

impl BlackColoring {
    pub fn black_count(&self) -> usize {
        self.black.iter().filter(|&&b| b).count()
    }
}

pub fn black_coloring(n: usize, q: f64, seed: u64) -> Result<BlackColoring> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain("black_coloring", format!("q = {q} not in (0, 1]")));
    }
    let mut rng = stream(seed);
    let black = (0..n).map(|_| rng.random::<f64>() < q).collect();
    Ok(BlackColoring {
        q,
        seed,
        black,
    })
}

/// Per-component black counts summarized as `z(s)` = number of components
/// with at least `s` black vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlackThreshold {
    /// Largest black count over all components; 0 if nothing is black.
    pub max_s: usize,
    /// `z_tilde[s - 1]` for `s = 1..=max_s`.
    pub z_tilde: Vec<usize>,
}

impl BlackThreshold {
    pub fn z(&self, s: usize) -> usize {
        if s == 0 {
            return usize::MAX;
        }
        self.z_tilde.get(s - 1).copied().unwrap_or(0)
    }
}

pub fn black_threshold(labeling: &Labeling, blacks: &BlackColoring) -> Result<BlackThreshold> {
    let n = labeling.n();
    if blacks.black.len() != n {
        return Err(Error::InvalidParams(format!(
            "coloring has {} vertices, labeling has {n}",
            blacks.black.len()
        )));
    }
    let mut per_comp = vec![0u32; n];
    for (v, &b) in blacks.black.iter().enumerate() {
        if b {
            per_comp[labeling.comp_id(v as Vertex) as usize] += 1;
        }
    }
    let max_s = per_comp.iter().copied().max().unwrap_or(0) as usize;
    let mut exact = vec![0usize; max_s + 1];
    for &b in &per_comp {
        if b > 0 {
            exact[b as usize] += 1;
        }
    }
    let mut z_tilde = vec![0usize; max_s];
    let mut acc = 0;
    for s in (1..=max_s).rev() {
        acc += exact[s];
        z_tilde[s - 1] = acc;
    }
    Ok(BlackThreshold { max_s, z_tilde })
}

/// Census CSV with columns `stat_kind,key,value`.
pub fn write_census_csv<W: Write>(
    layer: Option<&ComponentCensus>,
    ca: Option<&CaCensus>,
    sink: W,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(["stat_kind", "key", "value"])?;
    let mut row = |kind: &str, key: String, value: usize| {
        w.write_record([kind, key.as_str(), value.to_string().as_str()])
    };
    if let Some(c) = layer {
        row("n", String::new(), c.n)?;
        row("max_size", String::new(), c.max_size)?;
        row("second_size", String::new(), c.second_size)?;
        row("cyclic_components", String::new(), c.cyclic_components)?;
        row("cyclic_vertices", String::new(), c.cyclic_vertices)?;
        for (s, cnt) in &c.size_hist {
            row("size_hist", s.to_string(), *cnt)?;
        }
        for (s, cnt) in &c.tree_counts {
            row("tree_count", s.to_string(), *cnt)?;
        }
    }
    if let Some(c) = ca {
        row("ca_n", String::new(), c.n)?;
        row("max_ca_size", String::new(), c.max_ca_size)?;
        for (s, cnt) in &c.size_hist {
            row("ca_size_hist", s.to_string(), *cnt)?;
        }
        for (l, cnt) in &c.small_counts {
            row("N", l.to_string(), *cnt)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::{ca_partition, components};
    use crate::model::ColoredMultigraph;

    fn map(pairs: &[(usize, usize)]) -> BTreeMap<usize, usize> {
        pairs.iter().copied().collect()
    }

    fn census_of(n: usize, edges: &[Edge]) -> ComponentCensus {
        let l = components(n, edges.iter().copied()).unwrap();
        census(&l, edges).unwrap()
    }

    #[test]
    fn isolated_vertices_are_trees() {
        let c = census_of(3, &[]);
        assert_eq!(c.size_hist, map(&[(1, 3)]));
        assert_eq!(c.tree_counts, map(&[(1, 3)]));
        assert_eq!(c.cyclic_components, 0);
    }

    #[test]
    fn triangle_is_cyclic() {
        let c = census_of(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(c.size_hist, map(&[(3, 1)]));
        assert_eq!(c.tree_counts, map(&[(3, 0)]));
        assert_eq!(c.cyclic_components, 1);
        assert_eq!(c.cyclic_vertices, 3);
    }

    #[test]
    fn mixed_forest() {
        let c = census_of(6, &[(0, 1), (1, 2), (3, 4)]);
        assert_eq!(c.size_hist, map(&[(3, 1), (2, 1), (1, 1)]));
        assert_eq!(c.tree_counts, map(&[(3, 1), (2, 1), (1, 1)]));
        assert_eq!((c.max_size, c.second_size), (3, 2));
    }

    #[test]
    fn edge_across_classes_is_rejected() {
        let l = Labeling::singletons(3);
        assert!(matches!(
            census(&l, &[(0, 1)]),
            Err(Error::InconsistentLabeling { u: 0, v: 1 })
        ));
    }

    fn partition(comp_id: Vec<u32>, k: usize) -> CaPartition {
        let l = Labeling::from_comp_ids(comp_id).unwrap();
        CaPartition {
            labeling: l.clone(),
            source_labels: vec![l; k],
        }
    }

    #[test]
    fn ca_census_examples() {
        let c = ca_census(&partition(vec![0, 1, 2, 3], 3), 3);
        assert_eq!(c.max_ca_size, 1);
        assert_eq!(c.small_counts, map(&[(2, 0), (3, 0)]));

        let c = ca_census(&partition(vec![0; 5], 2), 2);
        assert_eq!(c.max_ca_size, 5);
        assert_eq!(c.count(2), 0);

        let c = ca_census(&partition(vec![0, 0, 2, 2, 2, 5], 3), 3);
        assert_eq!((c.count(2), c.count(3), c.max_ca_size), (1, 1, 3));
    }

    #[test]
    fn ca_census_from_graph() {
        let g = ColoredMultigraph::from_layers(3, vec![vec![(0, 1)], vec![(0, 1), (1, 2)]])
            .unwrap();
        let c = ca_census(&ca_partition(&g).unwrap(), 2);
        assert_eq!(c.size_hist, map(&[(1, 1), (2, 1)]));
        assert_eq!(c.count(2), 1);
    }

    #[test]
    fn black_coloring_contract() {
        let all = black_coloring(100, 1.0, 3).unwrap();
        assert_eq!(all.black_count(), 100);
        assert_eq!(black_coloring(100, 0.3, 9).unwrap(), black_coloring(100, 0.3, 9).unwrap());
        assert!(black_coloring(10, 0.0, 0).is_err());
        assert!(black_coloring(10, 1.5, 0).is_err());
        assert!(black_coloring(10, f64::NAN, 0).is_err());
    }

    fn marks(n: usize, on: &[usize]) -> BlackColoring {
        let mut black = vec![false; n];
        for &v in on {
            black[v] = true;
        }
        BlackColoring { q: 0.5, seed: 0, black }
    }

    #[test]
    fn black_threshold_examples() {
        let l = components(5, [(0, 1), (2, 3), (3, 4)]).unwrap();
        let t = black_threshold(&l, &marks(5, &[])).unwrap();
        assert_eq!(t.max_s, 0);
        assert!(t.z_tilde.is_empty());

        let l3 = components(3, [(0, 1), (1, 2)]).unwrap();
        let t = black_threshold(&l3, &marks(3, &[0, 1, 2])).unwrap();
        assert_eq!(t.max_s, 3);
        assert_eq!(t.z_tilde, vec![1, 1, 1]);

        let t = black_threshold(&l, &marks(5, &[0, 2, 3])).unwrap();
        assert_eq!(t.max_s, 2);
        assert_eq!((t.z(1), t.z(2), t.z(3)), (2, 1, 0));
    }

    #[test]
    fn census_csv_rows() {
        let c = census_of(3, &[(0, 1)]);
        let mut out = Vec::new();
        write_census_csv(Some(&c), None, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("stat_kind,key,value\nn,,3\nmax_size,,2\n"));
        assert!(text.contains("tree_count,2,1\n"));
    }
}
