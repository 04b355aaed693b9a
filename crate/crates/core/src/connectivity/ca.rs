use std::io::Write;

use super::{components, Labeling};
use crate::error::{Error, Result};
use crate::model::{ColorSet, ColoredMultigraph, Vertex};

/// Color-avoiding components together with the per-color partitions they were
/// built from. `source_labels[i - 1]` is the partition of the graph with
/// color `i` deleted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaPartition {
    pub labeling: Labeling,
    pub source_labels: Vec<Labeling>,
}

impl CaPartition {
    pub fn n(&self) -> usize {
        self.labeling.n()
    }

    pub fn k(&self) -> usize {
        self.source_labels.len()
    }

    pub fn max_size(&self) -> usize {
        self.labeling.max_size()
    }
}

/// Meet (common refinement) of partitions over the same vertex set.
///
/// Vertices are ordered by their label tuple with a stable LSD counting sort,
/// one pass per partition, starting from ascending vertex order. Each run of
/// equal tuples is a class and its first vertex is the minimum, so the result
/// is canonical. Time and extra memory are O(k n).
pub fn meet(parts: &[Labeling]) -> Result<Labeling> {
    let Some(first) = parts.first() else {
        return Err(Error::Empty("meet of zero partitions"));
    };
    let n = first.n();
    if parts.iter().any(|p| p.n() != n) {
        return Err(Error::Invariant("partitions over different vertex counts".into()));
    }
    if n == 0 {
        return Ok(Labeling::singletons(0));
    }
    if parts.len() == 1 {
        return Ok(first.clone());
    }

    let mut order: Vec<Vertex> = (0..n as Vertex).collect();
    let mut scratch: Vec<Vertex> = vec![0; n];
    let mut count: Vec<u32> = vec![0; n + 1];
    for part in parts.iter().rev() {
        let labels = part.as_slice();
        count.fill(0);
        for &v in &order {
            count[labels[v as usize] as usize + 1] += 1;
        }
        for i in 1..=n {
            count[i] += count[i - 1];
        }
        for &v in &order {
            let slot = &mut count[labels[v as usize] as usize];
            scratch[*slot as usize] = v;
            *slot += 1;
        }
        std::mem::swap(&mut order, &mut scratch);
    }

    let same_tuple = |a: Vertex, b: Vertex| {
        parts
            .iter()
            .all(|p| p.as_slice()[a as usize] == p.as_slice()[b as usize])
    };
    let mut comp_id = vec![0; n];
    let mut rep = order[0];
    let mut prev = order[0];
    for &v in &order {
        if !same_tuple(prev, v) {
            rep = v;
        }
        comp_id[v as usize] = rep;
        prev = v;
    }
    Ok(Labeling::from_comp_ids_unchecked(comp_id))
}

/// Color-avoiding components of `g`: `u` and `v` share a class iff they are
/// connected in every graph obtained by deleting one color.
pub fn ca_partition(g: &ColoredMultigraph) -> Result<CaPartition> {
    let k = g.k();
    if k < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 colors, got {k}")));
    }
    let source_labels = per_color_labels(g)?;
    let labeling = meet(&source_labels)?;
    Ok(CaPartition {
        labeling,
        source_labels,
    })
}

#[cfg(feature = "parallel")]
fn per_color_labels(g: &ColoredMultigraph) -> Result<Vec<Labeling>> {
    use rayon::prelude::*;
    (1..=g.k())
        .into_par_iter()
        .map(|i| components(g.n(), g.edges_in(ColorSet::single(i).complement(g.k()))))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn per_color_labels(g: &ColoredMultigraph) -> Result<Vec<Labeling>> {
    (1..=g.k())
        .map(|i| components(g.n(), g.edges_in(ColorSet::single(i).complement(g.k()))))
        .collect()
}

/// Partition CSV: `vertex,ca_comp_id,comp_id_minus_1,...,comp_id_minus_k`.
pub fn write_partition_csv<W: Write>(p: &CaPartition, sink: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    let mut header = vec!["vertex".to_string(), "ca_comp_id".to_string()];
    header.extend((1..=p.k()).map(|i| format!("comp_id_minus_{i}")));
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(p.k() + 2);
    for v in 0..p.n() as Vertex {
        row.clear();
        row.push(v.to_string());
        row.push(p.labeling.comp_id(v).to_string());
        row.extend(p.source_labels.iter().map(|l| l.comp_id(v).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, layers: Vec<Vec<(u32, u32)>>) -> ColoredMultigraph {
        ColoredMultigraph::from_layers(n, layers).unwrap()
    }

    #[test]
    fn crossing_layers_give_singletons() {
        let p = ca_partition(&g(4, vec![vec![(0, 1), (2, 3)], vec![(1, 2)]])).unwrap();
        assert_eq!(p.labeling.as_slice(), &[0, 1, 2, 3]);
        assert_eq!(p.source_labels[0].as_slice(), &[0, 1, 1, 3]);
        assert_eq!(p.source_labels[1].as_slice(), &[0, 0, 2, 2]);
    }

    #[test]
    fn doubled_edge_is_ca_connected() {
        let p = ca_partition(&g(2, vec![vec![(0, 1)], vec![(0, 1)]])).unwrap();
        assert_eq!(p.labeling.as_slice(), &[0, 0]);
    }

    #[test]
    fn complete_layers_give_one_class() {
        for k in 2..5 {
            let n = 7u32;
            let all: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let p = ca_partition(&g(n as usize, vec![all.clone(); k])).unwrap();
            assert_eq!(p.max_size(), n as usize);
            assert_eq!(p.labeling.component_count(), 1);
        }
    }

    #[test]
    fn meet_of_known_partitions() {
        let a = Labeling::from_comp_ids(vec![0, 0, 0, 3, 3, 3]).unwrap();
        let b = Labeling::from_comp_ids(vec![0, 1, 0, 1, 4, 4]).unwrap();
        let m = meet(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(m.as_slice(), &[0, 1, 0, 3, 4, 4]);
        assert_eq!(meet(&[b, a]).unwrap(), m);
        assert!(meet(&[]).is_err());
    }

    #[test]
    fn partition_csv_layout() {
        let p = ca_partition(&g(3, vec![vec![(0, 1)], vec![(0, 1), (1, 2)]])).unwrap();
        let mut out = Vec::new();
        write_partition_csv(&p, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "vertex,ca_comp_id,comp_id_minus_1,comp_id_minus_2\n0,0,0,0\n1,0,0,0\n2,2,0,2\n"
        );
    }
}
