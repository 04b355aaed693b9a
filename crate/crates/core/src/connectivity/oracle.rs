use rand::Rng;
use serde::Serialize;

use super::{ca_partition, CaPartition, Labeling};
use crate::error::{Error, Result};
use crate::model::{sample_layer, ColoredMultigraph, Vertex};
use crate::rng::{derive_seed, stream, StreamTag};

pub const DEFAULT_ORACLE_CAP: usize = 64;

type Relation = Vec<Vec<bool>>;

/// Reflexive-transitive closure of the adjacency of all layers except
/// `deleted` (1-based), by Warshall's algorithm.
fn reachability_without(g: &ColoredMultigraph, deleted: usize) -> Relation {
    let n = g.n();
    let mut r = vec![vec![false; n]; n];
    for (v, row) in r.iter_mut().enumerate() {
        row[v] = true;
    }
    for color in (1..=g.k()).filter(|&c| c != deleted) {
        for &(u, v) in g.layer(color) {
            r[u as usize][v as usize] = true;
            r[v as usize][u as usize] = true;
        }
    }
    for m in 0..n {
        for i in 0..n {
            if r[i][m] {
                for j in 0..n {
                    if r[m][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

fn check_equivalence(r: &Relation) -> Result<()> {
    let n = r.len();
    for i in 0..n {
        if !r[i][i] {
            return Err(Error::Invariant(format!("relation not reflexive at {i}")));
        }
        for j in 0..n {
            if r[i][j] != r[j][i] {
                return Err(Error::Invariant(format!("relation not symmetric at ({i}, {j})")));
            }
            if r[i][j] {
                for l in 0..n {
                    if r[j][l] && !r[i][l] {
                        return Err(Error::Invariant(format!(
                            "relation not transitive at ({i}, {j}, {l})"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

fn relation_to_labeling(r: &Relation) -> Labeling {
    let comp_id = r
        .iter()
        .map(|row| row.iter().position(|&x| x).unwrap_or(0) as Vertex)
        .collect();
    Labeling::from_comp_ids_unchecked(comp_id)
}

/// Brute-force color-avoiding partition for graphs with at most `cap`
/// vertices: per-color reachability by cubic closure, intersected
/// pairwise, checked to be an equivalence relation.
pub fn ca_oracle(g: &ColoredMultigraph, cap: usize) -> Result<CaPartition> {
    let n = g.n();
    if n > cap {
        return Err(Error::OracleCap { n, cap });
    }
    let k = g.k();
    if k < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 colors, got {k}")));
    }
    let closures: Vec<Relation> = (1..=k).map(|i| reachability_without(g, i)).collect();
    let mut both = vec![vec![true; n]; n];
    for c in &closures {
        for (row, crow) in both.iter_mut().zip(c) {
            for (x, &y) in row.iter_mut().zip(crow) {
                *x &= y;
            }
        }
    }
    check_equivalence(&both)?;
    Ok(CaPartition {
        labeling: relation_to_labeling(&both),
        source_labels: closures.iter().map(relation_to_labeling).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfTest {
    pub instances: u64,
    pub mismatches: u64,
    /// Index of the first instance where the two disagree.
    pub first_mismatch: Option<u64>,
}

/// Compares [`ca_partition`] with [`ca_oracle`] on random instances with
/// `1..=max_n` vertices, 2 to 4 colors and per-layer edge probability in
/// `{0.1, ..., 0.9}`. Instance `i` is a function of `(seed, i)` only.
pub fn oracle_self_test(instances: u64, max_n: usize, seed: u64) -> Result<SelfTest> {
    if max_n == 0 || max_n > DEFAULT_ORACLE_CAP {
        return Err(Error::InvalidParams(format!(
            "max_n = {max_n} not in 1..={DEFAULT_ORACLE_CAP}"
        )));
    }
    let mut report = SelfTest {
        instances,
        mismatches: 0,
        first_mismatch: None,
    };
    for i in 0..instances {
        let s = derive_seed(seed, i, StreamTag::Trial);
        let mut rng = stream(s);
        let n = rng.random_range(1..=max_n);
        let k = rng.random_range(2..=4);
        let layers = (1..=k)
            .map(|c| {
                let p = rng.random_range(1..=9) as f64 / 10.0;
                sample_layer(n, p, derive_seed(s, c as u64, StreamTag::Layer))
            })
            .collect();
        let g = ColoredMultigraph::from_layers(n, layers)?;
        if ca_partition(&g)?.labeling != ca_oracle(&g, DEFAULT_ORACLE_CAP)?.labeling {
            report.mismatches += 1;
            report.first_mismatch.get_or_insert(i);
        }
    }
    Ok(report)
}
