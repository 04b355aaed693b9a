use serde::{Deserialize, Serialize};

use super::{
    check_grid, finish, fmt_list, non_increasing, run_batch, start_clock, strictly_decreasing,
    summarize, ExperimentReport, Verdict,
};
use crate::error::{Error, Result};
use crate::model::{ColorSet, ModelParams};
use crate::montecarlo::{layer_key, scalar_values, Metric, RunManifest, Summary, TrialSpec};
use crate::output::{Axes, Series};
use crate::theory::{ell_cutoff, expected_tree_count, giant_size_estimate};

fn one_layer_params(n: usize, lambda: f64) -> Result<ModelParams> {
    // only color 1 is sampled; the second color just satisfies k >= 2
    ModelParams::new(n, vec![lambda, lambda])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeCensusConfig {
    pub lambda: f64,
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub omega: f64,
    /// Sizes `1..=checked_sizes` must match the expectation within `rel_tol`.
    pub checked_sizes: u64,
    pub rel_tol: f64,
    /// Largest component size allowed in any trial; defaults to
    /// `floor(ell) + 2 omega + slack`.
    pub size_cap: Option<usize>,
    pub slack: usize,
    pub max_cyclic_median: f64,
}

impl Default for TreeCensusConfig {
    fn default() -> Self {
        TreeCensusConfig {
            lambda: 0.5,
            n: 100_000,
            trials: 100,
            master_seed: 1,
            omega: 1.0,
            checked_sizes: 10,
            rel_tol: 0.05,
            size_cap: None,
            slack: 30,
            max_cyclic_median: 20.0,
        }
    }
}

/// Tree components of each size in one subcritical layer against their
/// exact expectation, plus the size of the largest component and the number
/// of vertices on cyclic components.
pub fn tree_census(cfg: &TreeCensusConfig, workers: usize) -> Result<ExperimentReport> {
    if !(cfg.lambda > 0.0 && cfg.lambda < 1.0) {
        return Err(Error::domain("tree_census", format!("lambda = {} not in (0, 1)", cfg.lambda)));
    }
    let n = cfg.n;
    let ell = ell_cutoff(n as f64, cfg.lambda, cfg.omega)?;
    let ell_floor = ell.max(0.0).floor() as u64;
    let cap = cfg
        .size_cap
        .unwrap_or(ell_floor as usize + (2.0 * cfg.omega).ceil() as usize + cfg.slack);
    let colors = ColorSet::single(1);
    let key = layer_key(colors);

    let clock = start_clock();
    let mut report = ExperimentReport::new(
        "tree_census",
        RunManifest::new(serde_json::to_value(cfg)?, cfg.master_seed, workers),
    );
    let spec = TrialSpec {
        params: one_layer_params(n, cfg.lambda)?,
        metrics: vec![Metric::LayerCensus { colors }],
        master_seed: cfg.master_seed,
        trials: cfg.trials,
    };
    let results = run_batch(&spec, workers, &mut report.manifest, n.to_string())?;
    report.row(n, "ell", "value", ell);

    let tree_key = format!("{key}.tree_hist");
    let max_s = ell_floor.max(cfg.checked_sizes).min(n as u64);
    let mut worst_rel = 0.0f64;
    let mut points = Vec::new();
    for s in 1..=max_s {
        let per_trial: Vec<f64> = results
            .iter()
            .map(|r| {
                r.histograms
                    .get(&tree_key)
                    .and_then(|h| h.get(&s))
                    .copied()
                    .unwrap_or(0) as f64
            })
            .collect();
        let obs = Summary::from_values(&per_trial)?;
        let expected = expected_tree_count(n as f64, cfg.lambda, s)?.value;
        let rel = (obs.mean - expected).abs() / expected;
        let se = obs.sd / (per_trial.len() as f64).sqrt();
        let metric = format!("trees_{s}");
        report.row(n, &metric, "mean", obs.mean);
        report.row(n, &metric, "sd", obs.sd);
        report.row(n, &metric, "expected", expected);
        report.row(n, &metric, "rel_err", rel);
        report.row(n, &metric, "z", if se > 0.0 { (obs.mean - expected) / se } else { 0.0 });
        if s <= cfg.checked_sizes {
            worst_rel = worst_rel.max(rel);
        }
        if obs.mean > 0.0 {
            points.push((s as f64, obs.mean));
        }
    }
    report.push(Verdict::new(
        "tree_counts_match",
        format!("mean tree count matches its expectation for s <= {}", cfg.checked_sizes),
        "exact expectation",
        worst_rel,
        format!("max relative error < {}", cfg.rel_tol),
        worst_rel < cfg.rel_tol,
    ));

    let largest = summarize(&results, &format!("{key}.max"))?;
    report.summary_rows(n, "largest_component", &largest);
    report.push(Verdict::new(
        "no_large_components",
        format!("no component larger than {cap} in any trial"),
        format!("<= {cap}"),
        largest.max,
        format!("max over trials <= {cap}"),
        largest.max <= cap as f64,
    ));

    let cyclic = summarize(&results, &format!("{key}.cyclic_vertices"))?;
    report.summary_rows(n, "cyclic_vertices", &cyclic);
    let median = cyclic.quantile(50).expect("median");
    report.push(Verdict::new(
        "few_cyclic_vertices",
        "few vertices lie on components containing a cycle",
        "O(1)",
        median,
        format!("median <= {}", cfg.max_cyclic_median),
        median <= cfg.max_cyclic_median,
    ));

    report.plot = Some((
        Series {
            label: "mean tree count".into(),
            points,
        },
        Axes {
            title: format!("tree components, n = {n}, lambda = {}", cfg.lambda),
            x_label: "s".into(),
            y_label: "mean number of trees of size s".into(),
            x_log: false,
            y_log: true,
        },
    ));
    Ok(finish(report, clock))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlackThresholdConfig {
    pub lambda: f64,
    pub q: f64,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub master_seed: u64,
    pub ratio_low: f64,
    pub ratio_high: f64,
}

impl Default for BlackThresholdConfig {
    fn default() -> Self {
        BlackThresholdConfig {
            lambda: 0.5,
            q: 0.05,
            n_grid: vec![100_000, 1_000_000, 10_000_000],
            trials: 30,
            master_seed: 1,
            ratio_low: 0.5,
            ratio_high: 1.8,
        }
    }
}

/// Largest number of marked vertices in one component of a subcritical
/// layer, against `ln n / ln(1/q)`.
pub fn black_threshold(cfg: &BlackThresholdConfig, workers: usize) -> Result<ExperimentReport> {
    const NAME: &str = "black_threshold";
    if !(cfg.lambda > 0.0 && cfg.lambda < 1.0) {
        return Err(Error::domain(NAME, format!("lambda = {} not in (0, 1)", cfg.lambda)));
    }
    if !(cfg.q > 0.0 && cfg.q < 1.0) {
        return Err(Error::domain(NAME, format!("q = {} not in (0, 1)", cfg.q)));
    }
    check_grid(&cfg.n_grid)?;
    let colors = ColorSet::single(1);
    let metric = format!("{}.black_max_s", layer_key(colors));
    let ln_inv_q = (1.0 / cfg.q).ln();

    let clock = start_clock();
    let mut report = ExperimentReport::new(
        NAME,
        RunManifest::new(serde_json::to_value(cfg)?, cfg.master_seed, workers),
    );
    let mut ratios = Vec::new();
    for &n in &cfg.n_grid {
        let ln_n = (n as f64).ln();
        if ln_inv_q / ln_n > 0.5 {
            report.warnings.push(format!(
                "ln(1/q) / ln n = {} at n = {n} is not small",
                ln_inv_q / ln_n
            ));
        }
        let spec = TrialSpec {
            params: one_layer_params(n, cfg.lambda)?,
            metrics: vec![Metric::BlackThreshold { colors, q: cfg.q }],
            master_seed: cfg.master_seed,
            trials: cfg.trials,
        };
        let results = run_batch(&spec, workers, &mut report.manifest, n.to_string())?;
        let s = summarize(&results, &metric)?;
        let predicted = ln_n / ln_inv_q;
        report.summary_rows(n, "black_max_s", &s);
        report.row(n, "black_max_s", "predicted", predicted);
        report.row(n, "ratio", "value", s.mean / predicted);
        ratios.push(s.mean / predicted);
    }

    let in_band = ratios.iter().all(|r| (cfg.ratio_low..=cfg.ratio_high).contains(r));
    report.push(Verdict::new(
        "ratio_in_band",
        "mean largest black count times ln(1/q) / ln n is bounded at every n",
        "1",
        ratios[ratios.len() - 1],
        format!("[{}, {}] at all n; observed {}", cfg.ratio_low, cfg.ratio_high, fmt_list(&ratios)),
        in_band,
    ));
    let gaps: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    report.push(Verdict::new(
        "ratio_approaches_one",
        "|ratio - 1| does not grow along the grid",
        "non-increasing",
        gaps[gaps.len() - 1],
        format!("non-increasing; observed {}", fmt_list(&gaps)),
        non_increasing(&gaps),
    ));
    report.plot = Some((
        Series {
            label: format!("q = {}", cfg.q),
            points: cfg.n_grid.iter().map(|&n| n as f64).zip(ratios.iter().copied()).collect(),
        },
        Axes {
            title: "largest black count per component".into(),
            x_label: "n".into(),
            y_label: "mean max s * ln(1/q) / ln n".into(),
            x_log: true,
            y_log: false,
        },
    ));
    Ok(finish(report, clock))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GiantLlnConfig {
    /// `lambda = 1 + n^-exponent`, exponent in (0, 1/3).
    pub exponent: f64,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub master_seed: u64,
    pub ratio_low: f64,
    pub ratio_high: f64,
    /// Largest allowed second/largest component ratio.
    pub uniqueness_ratio: f64,
    /// Required fraction of trials below `uniqueness_ratio` at the largest n.
    pub uniqueness_fraction: f64,
}

impl Default for GiantLlnConfig {
    fn default() -> Self {
        GiantLlnConfig {
            exponent: 0.25,
            n_grid: vec![100_000, 1_000_000],
            trials: 30,
            master_seed: 1,
            ratio_low: 1.6,
            ratio_high: 2.4,
            uniqueness_ratio: 0.5,
            uniqueness_fraction: 0.9,
        }
    }
}

/// Largest component of one barely supercritical layer, `lambda = 1 + n^-a`,
/// normalized by `(lambda - 1) n`.
pub fn giant_lln(cfg: &GiantLlnConfig, workers: usize) -> Result<ExperimentReport> {
    if !(cfg.exponent > 0.0 && cfg.exponent < 1.0 / 3.0) {
        return Err(Error::domain(
            "giant_lln",
            format!("exponent = {} not in (0, 1/3)", cfg.exponent),
        ));
    }
    check_grid(&cfg.n_grid)?;
    let colors = ColorSet::single(1);
    let key = layer_key(colors);

    let clock = start_clock();
    let mut report = ExperimentReport::new(
        "giant_lln",
        RunManifest::new(serde_json::to_value(cfg)?, cfg.master_seed, workers),
    );
    let mut normalized = Vec::new();
    let mut unique = 0.0;
    for &n in &cfg.n_grid {
        let lambda = 1.0 + (n as f64).powf(-cfg.exponent);
        let (estimate, warnings) = giant_size_estimate(n as f64, lambda)?;
        report.warnings.extend(warnings);
        let spec = TrialSpec {
            params: one_layer_params(n, lambda)?,
            metrics: vec![Metric::GiantSize { colors }],
            master_seed: cfg.master_seed,
            trials: cfg.trials,
        };
        let results = run_batch(&spec, workers, &mut report.manifest, n.to_string())?;
        let s = summarize(&results, &format!("{key}.max"))?;
        let norm = s.mean / ((lambda - 1.0) * n as f64);
        let second = scalar_values(&results, &format!("{key}.second"));
        let largest = scalar_values(&results, &format!("{key}.max"));
        unique = second
            .iter()
            .zip(&largest)
            .filter(|(s, l)| **s < cfg.uniqueness_ratio * **l)
            .count() as f64
            / largest.len() as f64;
        report.row(n, "lambda", "value", lambda);
        report.summary_rows(n, "largest_component", &s);
        report.row(n, "largest_component", "predicted", estimate);
        report.summary_rows(n, "second_component", &summarize(&results, &format!("{key}.second"))?);
        report.row(n, "normalized", "value", norm);
        report.row(n, "second_below_half_largest", "fraction", unique);
        normalized.push(norm);
    }

    let in_band = normalized.iter().all(|r| (cfg.ratio_low..=cfg.ratio_high).contains(r));
    report.push(Verdict::new(
        "normalized_in_band",
        "mean largest component / ((lambda - 1) n) is near 2 at every n",
        "2",
        normalized[normalized.len() - 1],
        format!(
            "[{}, {}] at all n; observed {}",
            cfg.ratio_low,
            cfg.ratio_high,
            fmt_list(&normalized)
        ),
        in_band,
    ));
    let gaps: Vec<f64> = normalized.iter().map(|r| (r - 2.0).abs()).collect();
    report.push(Verdict::new(
        "normalized_approaches_two",
        "|normalized - 2| shrinks along the grid",
        "decreasing",
        gaps[gaps.len() - 1],
        format!("strictly decreasing; observed {}", fmt_list(&gaps)),
        strictly_decreasing(&gaps),
    ));
    report.push(Verdict::new(
        "giant_unique",
        format!(
            "second largest component below {} of the largest at the largest n",
            cfg.uniqueness_ratio
        ),
        "unique",
        unique,
        format!("fraction >= {}", cfg.uniqueness_fraction),
        unique >= cfg.uniqueness_fraction,
    ));
    report.plot = Some((
        Series {
            label: format!("a = {}", cfg.exponent),
            points: cfg
                .n_grid
                .iter()
                .map(|&n| n as f64)
                .zip(normalized.iter().copied())
                .collect(),
        },
        Axes {
            title: "barely supercritical giant component".into(),
            x_label: "n".into(),
            y_label: "mean largest / ((lambda - 1) n)".into(),
            x_log: true,
            y_log: false,
        },
    ));
    Ok(finish(report, clock))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_guards() {
        let bad_q = BlackThresholdConfig {
            q: 1.0,
            ..Default::default()
        };
        assert!(matches!(black_threshold(&bad_q, 1), Err(Error::Domain { .. })));
        let bad_a = GiantLlnConfig {
            exponent: 0.4,
            ..Default::default()
        };
        assert!(matches!(giant_lln(&bad_a, 1), Err(Error::Domain { .. })));
        let bad_l = TreeCensusConfig {
            lambda: 1.0,
            ..Default::default()
        };
        assert!(matches!(tree_census(&bad_l, 1), Err(Error::Domain { .. })));
    }

    #[test]
    fn tree_census_small() {
        let cfg = TreeCensusConfig {
            n: 5000,
            trials: 40,
            ..Default::default()
        };
        let r = tree_census(&cfg, 1).unwrap();
        let expected = r.value(5000, "trees_1", "expected").unwrap();
        // n (1 - lambda/n)^(n-1)
        assert!((expected - 5000.0 * (1.0 - 0.5 / 5000.0f64).powi(4999)).abs() < 1e-6);
        let mean = r.value(5000, "trees_1", "mean").unwrap();
        assert!((mean - expected).abs() / expected < 0.01);
        assert!(r.verdict("no_large_components").unwrap().pass);
    }

    #[test]
    fn black_prediction_column() {
        let cfg = BlackThresholdConfig {
            n_grid: vec![1000, 4000],
            trials: 5,
            ..Default::default()
        };
        let r = black_threshold(&cfg, 1).unwrap();
        let p = r.value(1000, "black_max_s", "predicted").unwrap();
        assert!((p - 1000f64.ln() / 20f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn giant_small() {
        let cfg = GiantLlnConfig {
            n_grid: vec![2000, 8000],
            trials: 4,
            ..Default::default()
        };
        let r = giant_lln(&cfg, 1).unwrap();
        assert_eq!(r.verdicts.len(), 3);
        assert!(r.value(8000, "normalized", "value").unwrap() > 0.0);
    }
}
