//! Deterministic trial execution and order-independent aggregation.
//!
//! Trial `t` of a run is driven entirely by
//! `derive_seed(master_seed, t, StreamTag::Trial)`, so a run's results depend
//! only on its spec, never on the number of workers or the scheduling.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::census::{black_coloring, black_threshold, ca_census, census};
use crate::connectivity::{ca_partition, components, Labeling};
use crate::error::{Error, Result};
use crate::model::{layer_seed, sample_layer, ColorSet, ColoredMultigraph, Edge, ModelParams};
use crate::rng::{derive_seed, StreamTag};

/// Quantile levels (percent) reported by [`aggregate`].
pub const QUANTILE_LEVELS: [u32; 7] = [1, 5, 25, 50, 75, 95, 99];

/// A per-trial measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "metric")]
pub enum Metric {
    /// Size of the largest color-avoiding class.
    MaxCa,
    /// Counts of color-avoiding classes of size 2..=k plus the size histogram.
    CaCensus,
    /// Component census of the union of the layers in `colors`.
    LayerCensus { colors: ColorSet },
    /// Largest number of Bernoulli(q) marked vertices in one component of
    /// the union of the layers in `colors`.
    BlackThreshold { colors: ColorSet, q: f64 },
    /// Largest and second largest component of the union of `colors`.
    GiantSize { colors: ColorSet },
    /// Containment of color-avoiding classes of size >= `threshold` in a
    /// single component of the last layer and in the largest component of
    /// the graph without the last color.
    CaIntersection { threshold: usize },
}

impl Metric {
    fn needs_all_layers(&self) -> bool {
        matches!(self, Metric::MaxCa | Metric::CaCensus | Metric::CaIntersection { .. })
    }

    fn colors(&self) -> Option<ColorSet> {
        match *self {
            Metric::LayerCensus { colors }
            | Metric::BlackThreshold { colors, .. }
            | Metric::GiantSize { colors } => Some(colors),
            _ => None,
        }
    }
}

/// Key prefix for metrics on a layer union, e.g. `G_1+2`.
pub fn layer_key(colors: ColorSet) -> String {
    let parts: Vec<String> = colors.iter().map(|c| c.to_string()).collect();
    format!("G_{}", parts.join("+"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub params: ModelParams,
    pub metrics: Vec<Metric>,
    pub master_seed: u64,
    pub trials: u64,
}

impl TrialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams("trial count must be at least 1".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidParams("no metrics requested".into()));
        }
        for m in &self.metrics {
            if let Some(c) = m.colors() {
                c.check(self.params.k())?;
                if c.is_empty() {
                    return Err(Error::InvalidParams(format!("{m:?}: empty color set")));
                }
            }
            if let Metric::BlackThreshold { q, .. } = m {
                if !(*q > 0.0 && *q <= 1.0) {
                    return Err(Error::InvalidParams(format!("black q = {q} not in (0, 1]")));
                }
            }
        }
        Ok(())
    }

    pub fn trial_seed(&self, trial_index: u64) -> u64 {
        derive_seed(self.master_seed, trial_index, StreamTag::Trial)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: u64,
    pub seed: u64,
    pub scalars: BTreeMap<String, f64>,
    pub histograms: BTreeMap<String, BTreeMap<u64, u64>>,
}

impl TrialResult {
    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }
}

fn to_hist(m: &BTreeMap<usize, usize>) -> BTreeMap<u64, u64> {
    m.iter().map(|(&k, &v)| (k as u64, v as u64)).collect()
}

/// Runs the measurement pipeline for one trial with an explicit trial seed.
pub fn run_trial(spec: &TrialSpec, trial_index: u64, seed: u64) -> Result<TrialResult> {
    let params = &spec.params;
    let n = params.n();
    let k = params.k();

    let mut wanted = ColorSet::empty();
    for m in &spec.metrics {
        if m.needs_all_layers() {
            wanted = ColorSet::full(k);
        } else if let Some(c) = m.colors() {
            wanted = ColorSet::from_bits(wanted.bits() | c.bits());
        }
    }
    // layers are sampled from independent streams, so skipping the unused
    // ones does not change the others
    let layers: Vec<Vec<Edge>> = (1..=k)
        .map(|i| {
            if wanted.contains(i) {
                sample_layer(n, params.edge_probability(i), layer_seed(seed, i))
            } else {
                Vec::new()
            }
        })
        .collect();
    let g = ColoredMultigraph::from_canonical(n, layers);

    let mut out = TrialResult {
        trial_index,
        seed,
        ..Default::default()
    };
    let mut cache: HashMap<ColorSet, (Vec<Edge>, Labeling)> = HashMap::new();
    let ca = if spec.metrics.iter().any(Metric::needs_all_layers) {
        Some(ca_partition(&g)?)
    } else {
        None
    };

    for m in &spec.metrics {
        match *m {
            Metric::MaxCa => {
                let p = ca.as_ref().expect("partition computed");
                out.scalars.insert("max_ca".into(), p.max_size() as f64);
            }
            Metric::CaCensus => {
                let c = ca_census(ca.as_ref().expect("partition computed"), k);
                out.scalars.insert("max_ca".into(), c.max_ca_size as f64);
                for (l, cnt) in &c.small_counts {
                    out.scalars.insert(format!("ca.N_{l}"), *cnt as f64);
                }
                out.histograms.insert("ca.size_hist".into(), to_hist(&c.size_hist));
            }
            Metric::LayerCensus { colors } => {
                let (edges, lab) = labeling_for(&mut cache, &g, colors)?;
                let c = census(lab, edges)?;
                let key = layer_key(colors);
                out.scalars.insert(format!("{key}.max"), c.max_size as f64);
                out.scalars.insert(format!("{key}.second"), c.second_size as f64);
                out.scalars
                    .insert(format!("{key}.components"), c.component_count() as f64);
                out.scalars
                    .insert(format!("{key}.cyclic_components"), c.cyclic_components as f64);
                out.scalars
                    .insert(format!("{key}.cyclic_vertices"), c.cyclic_vertices as f64);
                out.histograms.insert(format!("{key}.size_hist"), to_hist(&c.size_hist));
                out.histograms.insert(format!("{key}.tree_hist"), to_hist(&c.tree_counts));
            }
            Metric::BlackThreshold { colors, q } => {
                let (_, lab) = labeling_for(&mut cache, &g, colors)?;
                let blacks = black_coloring(n, q, derive_seed(seed, 0, StreamTag::Black))?;
                let t = black_threshold(lab, &blacks)?;
                out.scalars
                    .insert(format!("{}.black_max_s", layer_key(colors)), t.max_s as f64);
            }
            Metric::GiantSize { colors } => {
                let (_, lab) = labeling_for(&mut cache, &g, colors)?;
                let sizes = lab.sizes_desc();
                let key = layer_key(colors);
                out.scalars
                    .insert(format!("{key}.max"), sizes.first().copied().unwrap_or(0) as f64);
                out.scalars
                    .insert(format!("{key}.second"), sizes.get(1).copied().unwrap_or(0) as f64);
            }
            Metric::CaIntersection { threshold } => {
                let p = ca.as_ref().expect("partition computed");
                let (classes, in_last, in_giant) = intersection_violations(p, &g, threshold)?;
                out.scalars.insert("intersect.classes".into(), classes as f64);
                out.scalars.insert("intersect.violations_last_layer".into(), in_last as f64);
                out.scalars.insert("intersect.violations_giant".into(), in_giant as f64);
            }
        }
    }
    Ok(out)
}

fn labeling_for<'a>(
    cache: &'a mut HashMap<ColorSet, (Vec<Edge>, Labeling)>,
    g: &ColoredMultigraph,
    colors: ColorSet,
) -> Result<&'a (Vec<Edge>, Labeling)> {
    if !cache.contains_key(&colors) {
        let edges = g.union_view(colors);
        let lab = components(g.n(), edges.iter().copied())?;
        cache.insert(colors, (edges, lab));
    }
    Ok(&cache[&colors])
}

/// For every color-avoiding class of size >= `threshold`: is it inside one
/// component of the last layer, and inside the largest component of the
/// graph with the last color deleted? Returns (classes checked, violations
/// of the first, violations of the second).
fn intersection_violations(
    p: &crate::connectivity::CaPartition,
    g: &ColoredMultigraph,
    threshold: usize,
) -> Result<(usize, usize, usize)> {
    let k = g.k();
    let last_layer = components(g.n(), g.layer(k).iter().copied())?;
    let without_last = &p.source_labels[k - 1];
    let sizes = without_last.sizes_by_rep();
    // ties broken towards the smaller representative
    let giant = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(v, _)| v as u32)
        .unwrap_or(0);
    let (mut checked, mut bad_last, mut bad_giant) = (0, 0, 0);
    for (rep, members) in p.labeling.classes() {
        if members.len() < threshold.max(1) {
            continue;
        }
        checked += 1;
        let c = last_layer.comp_id(rep);
        if members.iter().any(|&v| last_layer.comp_id(v) != c) {
            bad_last += 1;
        }
        if members.iter().any(|&v| without_last.comp_id(v) != giant) {
            bad_giant += 1;
        }
    }
    Ok((checked, bad_last, bad_giant))
}

/// Runs `f(trial_index, trial_seed)` for every trial on `workers` threads and
/// returns the results in trial order. If any trial fails, the error of the
/// lowest failing index is returned.
pub fn run_indexed<R, F>(master_seed: u64, trials: u64, workers: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u64, u64) -> Result<R> + Sync,
{
    if workers == 0 {
        return Err(Error::InvalidParams("worker count must be positive".into()));
    }
    let job = |t: u64| {
        f(t, derive_seed(master_seed, t, StreamTag::Trial)).map_err(|e| Error::Trial {
            index: t,
            source: Box::new(e),
        })
    };
    let results: Vec<Result<R>> = execute(trials, workers, &job)?;
    results.into_iter().collect()
}

#[cfg(feature = "parallel")]
fn execute<R, J>(trials: u64, workers: usize, job: &J) -> Result<Vec<Result<R>>>
where
    R: Send,
    J: Fn(u64) -> Result<R> + Sync,
{
    use rayon::prelude::*;
    if workers == 1 {
        return Ok((0..trials).map(job).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..trials).into_par_iter().map(job).collect()))
}

#[cfg(not(feature = "parallel"))]
fn execute<R, J>(trials: u64, _workers: usize, job: &J) -> Result<Vec<Result<R>>>
where
    J: Fn(u64) -> Result<R>,
{
    Ok((0..trials).map(job).collect())
}

/// Runs every trial of `spec`; output is sorted by trial index and identical
/// for any worker count.
pub fn run_trials(spec: &TrialSpec, workers: usize) -> Result<Vec<TrialResult>> {
    spec.validate()?;
    run_indexed(spec.master_seed, spec.trials, workers, |t, seed| {
        run_trial(spec, t, seed)
    })
}

/// Summary statistics of one scalar metric across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased standard deviation; 0 when `count == 1` (see `sd_defined`).
    pub sd: f64,
    pub sd_defined: bool,
    pub min: f64,
    pub max: f64,
    /// `(level in percent, nearest-rank quantile)` for [`QUANTILE_LEVELS`].
    pub quantiles: Vec<(u32, f64)>,
}

impl Summary {
    /// Summarizes `values`. All arithmetic runs over the sorted values, so
    /// the result does not depend on input order.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("no values to summarize"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let count = sorted.len();
        let mean = sorted.iter().sum::<f64>() / count as f64;
        let (sd, sd_defined) = if count > 1 {
            let ss: f64 = sorted.iter().map(|x| (x - mean) * (x - mean)).sum();
            ((ss / (count - 1) as f64).sqrt(), true)
        } else {
            (0.0, false)
        };
        let quantiles = QUANTILE_LEVELS
            .iter()
            .map(|&p| (p, nearest_rank(&sorted, p)))
            .collect();
        Ok(Summary {
            count,
            mean,
            sd,
            sd_defined,
            min: sorted[0],
            max: sorted[count - 1],
            quantiles,
        })
    }

    pub fn quantile(&self, level: u32) -> Option<f64> {
        self.quantiles.iter().find(|(p, _)| *p == level).map(|(_, v)| *v)
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }
}

/// Nearest-rank quantile: the value at rank `ceil(p/100 * N)` (1-based,
/// at least 1) of the sorted sample.
pub fn nearest_rank(sorted: &[f64], percent: u32) -> f64 {
    let n = sorted.len();
    let rank = ((percent as usize * n).div_ceil(100)).max(1);
    sorted[rank.min(n) - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub scalars: BTreeMap<String, Summary>,
    pub histograms: BTreeMap<String, BTreeMap<u64, u64>>,
}

impl Aggregate {
    pub fn scalar(&self, name: &str) -> Option<&Summary> {
        self.scalars.get(name)
    }
}

/// Collects one scalar across results (missing values are skipped).
pub fn scalar_values(results: &[TrialResult], name: &str) -> Vec<f64> {
    results.iter().filter_map(|r| r.scalar(name)).collect()
}

/// Cross-trial summary. Every result must carry the same metric names.
pub fn aggregate(results: &[TrialResult]) -> Result<Aggregate> {
    let Some(first) = results.first() else {
        return Err(Error::Empty("no trial results to aggregate"));
    };
    let names: Vec<&String> = first.scalars.keys().collect();
    let hist_names: Vec<&String> = first.histograms.keys().collect();
    for r in results {
        if r.scalars.keys().collect::<Vec<_>>() != names
            || r.histograms.keys().collect::<Vec<_>>() != hist_names
        {
            return Err(Error::InvalidParams(format!(
                "trial {} reports different metrics than trial {}",
                r.trial_index, first.trial_index
            )));
        }
    }
    let mut scalars = BTreeMap::new();
    for name in names {
        scalars.insert(name.clone(), Summary::from_values(&scalar_values(results, name))?);
    }
    let mut histograms: BTreeMap<String, BTreeMap<u64, u64>> = BTreeMap::new();
    for r in results {
        for (name, h) in &r.histograms {
            let acc = histograms.entry(name.clone()).or_default();
            for (&k, &v) in h {
                *acc.entry(k).or_insert(0) += v;
            }
        }
    }
    Ok(Aggregate {
        trials: results.len(),
        scalars,
        histograms,
    })
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub spec: serde_json::Value,
    pub master_seed: u64,
    pub workers: usize,
    /// `(n or other grid key, trial seeds)` for every batch of trials.
    pub trial_seeds: Vec<(String, Vec<u64>)>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(spec: serde_json::Value, master_seed: u64, workers: usize) -> Self {
        RunManifest {
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            spec,
            master_seed,
            workers,
            trial_seeds: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }
}
