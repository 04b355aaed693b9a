use serde::{Deserialize, Serialize};

use super::{
    check_grid, finish, fmt_list, non_increasing, regime_scaling, run_batch, start_clock,
    summarize, ExperimentReport, RegimeScalingConfig, Verdict, ZetaRule,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::montecarlo::{aggregate, scalar_values, Metric, RunManifest, TrialSpec};
use crate::output::{Axes, Series};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CriticalWindowConfig {
    pub zeta_rule: ZetaRule,
    /// Intensity of the second color; must be below 1.
    pub lambda_rest: f64,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub master_seed: u64,
    /// Band for `ln(1/zeta) * mean(max_ca) / ln n`.
    pub ratio_low: f64,
    pub ratio_high: f64,
    /// Largest allowed rise of the 99% quantile over its value at the first n.
    pub quantile_growth: f64,
}

impl Default for CriticalWindowConfig {
    fn default() -> Self {
        CriticalWindowConfig {
            zeta_rule: ZetaRule::InvLog,
            lambda_rest: 0.5,
            n_grid: vec![100_000, 1_000_000, 4_000_000],
            trials: 30,
            master_seed: 1,
            ratio_low: 0.5,
            ratio_high: 1.6,
            quantile_growth: 1.0,
        }
    }
}

fn critical_params(n: usize, zeta: f64, lambda_rest: f64) -> Result<ModelParams> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::Regime(format!("zeta = {zeta} at n = {n} not in (0, 1)")));
    }
    if !(lambda_rest > 0.0 && lambda_rest < 1.0) {
        return Err(Error::Regime(format!(
            "lambda_rest = {lambda_rest} must lie in (0, 1)"
        )));
    }
    ModelParams::new(n, vec![1.0 + zeta, lambda_rest])
}

/// Two colors with intensities `1 + zeta(n)` and `lambda_rest`, so that
/// deleting the weaker color leaves a barely supercritical graph.
///
/// With `zeta = 1/ln n` the ratio `ln(1/zeta) * mean(max_ca) / ln n` is
/// checked for a band and a monotone approach to 1; with `zeta = n^-a` the
/// 99% quantile of `max_ca` is checked for flatness. A fixed `zeta` does not
/// vanish and is handed to [`regime_scaling`].
pub fn critical_window(cfg: &CriticalWindowConfig, workers: usize) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid)?;
    if !cfg.zeta_rule.vanishes() {
        let ZetaRule::Fixed { zeta } = cfg.zeta_rule else {
            return Err(Error::InvalidParams(format!(
                "zeta rule {:?} does not vanish",
                cfg.zeta_rule
            )));
        };
        let mut report = regime_scaling(
            &RegimeScalingConfig {
                lambdas: vec![1.0 + zeta, cfg.lambda_rest],
                n_grid: cfg.n_grid.clone(),
                trials: cfg.trials,
                master_seed: cfg.master_seed,
                ..Default::default()
            },
            workers,
        )?;
        report.warnings.push(format!(
            "zeta = {zeta} does not vanish with n; ran regime_scaling instead"
        ));
        return Ok(report);
    }
    for &n in &cfg.n_grid {
        critical_params(n, cfg.zeta_rule.zeta(n), cfg.lambda_rest)?;
    }

    let clock = start_clock();
    let mut report = ExperimentReport::new(
        "critical_window",
        RunManifest::new(serde_json::to_value(cfg)?, cfg.master_seed, workers),
    );
    let mut ratios = Vec::new();
    let mut q99 = Vec::new();
    for &n in &cfg.n_grid {
        let zeta = cfg.zeta_rule.zeta(n);
        let spec = TrialSpec {
            params: critical_params(n, zeta, cfg.lambda_rest)?,
            metrics: vec![Metric::MaxCa],
            master_seed: cfg.master_seed,
            trials: cfg.trials,
        };
        let results = run_batch(&spec, workers, &mut report.manifest, n.to_string())?;
        let s = summarize(&results, "max_ca")?;
        let predicted = (n as f64).ln() / (1.0 / zeta).ln();
        let ratio = s.mean / predicted;
        report.row(n, "zeta", "value", zeta);
        report.summary_rows(n, "max_ca", &s);
        report.row(n, "max_ca", "predicted", predicted);
        report.row(n, "ratio", "value", ratio);
        let mut values = scalar_values(&results, "max_ca");
        values.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < values.len() {
            let v = values[i];
            let j = i + values[i..].iter().take_while(|&&x| x == v).count();
            report.row(n, "max_ca_distribution", &format!("count_at_{v}"), (j - i) as f64);
            i = j;
        }
        ratios.push(ratio);
        q99.push(s.quantile(99).expect("99% quantile"));
    }

    if let ZetaRule::InvLog = cfg.zeta_rule {
        let in_band = ratios.iter().all(|r| (cfg.ratio_low..=cfg.ratio_high).contains(r));
        report.push(Verdict::new(
            "ratio_in_band",
            "ln(1/zeta) mean(max_ca) / ln n is bounded at every n",
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
    } else {
        let rise = q99.iter().copied().fold(f64::NEG_INFINITY, f64::max) - q99[0];
        report.push(Verdict::new(
            "quantile_flat",
            "99% quantile of max_ca shows no growth across the grid",
            "tight",
            rise,
            format!(
                "max q99 - first q99 <= {}; observed {}",
                cfg.quantile_growth,
                fmt_list(&q99)
            ),
            rise <= cfg.quantile_growth,
        ));
    }

    let (points, y_label) = match cfg.zeta_rule {
        ZetaRule::InvLog => (&ratios, "ln(1/zeta) mean max_ca / ln n"),
        _ => (&q99, "99% quantile of max_ca"),
    };
    report.plot = Some((
        Series {
            label: "critical window".into(),
            points: cfg.n_grid.iter().map(|&n| n as f64).zip(points.iter().copied()).collect(),
        },
        Axes {
            title: "largest color-avoiding class in the critical window".into(),
            x_label: "n".into(),
            y_label: y_label.into(),
            x_log: true,
            y_log: false,
        },
    ));
    Ok(finish(report, clock))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntersectionConfig {
    pub zeta_rule: ZetaRule,
    pub lambda_rest: f64,
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    /// Classes smaller than this are not checked.
    pub threshold: usize,
    /// Required fraction of trials without violations.
    pub min_fraction: f64,
}

impl Default for IntersectionConfig {
    fn default() -> Self {
        IntersectionConfig {
            zeta_rule: ZetaRule::InvLog,
            lambda_rest: 0.5,
            n: 1_000_000,
            trials: 20,
            master_seed: 1,
            threshold: 4,
            min_fraction: 0.9,
        }
    }
}

/// Checks that every color-avoiding class of size at least `threshold` lies
/// in one component of the last layer and in the largest component of the
/// graph without the last color.
pub fn intersection_structure(cfg: &IntersectionConfig, workers: usize) -> Result<ExperimentReport> {
    if !cfg.zeta_rule.vanishes() {
        return Err(Error::Regime(format!(
            "zeta rule {:?} does not describe the critical window",
            cfg.zeta_rule
        )));
    }
    let n = cfg.n;
    let params = critical_params(n, cfg.zeta_rule.zeta(n), cfg.lambda_rest)?;
    let clock = start_clock();
    let mut report = ExperimentReport::new(
        "intersection_structure",
        RunManifest::new(serde_json::to_value(cfg)?, cfg.master_seed, workers),
    );
    let spec = TrialSpec {
        params,
        metrics: vec![
            Metric::MaxCa,
            Metric::CaIntersection {
                threshold: cfg.threshold,
            },
        ],
        master_seed: cfg.master_seed,
        trials: cfg.trials,
    };
    let results = run_batch(&spec, workers, &mut report.manifest, n.to_string())?;
    let agg = aggregate(&results)?;
    for (name, s) in &agg.scalars {
        report.summary_rows(n, name, s);
    }
    let trials = results.len() as f64;
    for (check, key, statement) in [
        (
            "inside_last_layer_component",
            "intersect.violations_last_layer",
            "large classes lie in one component of the last layer",
        ),
        (
            "inside_giant_without_last_color",
            "intersect.violations_giant",
            "large classes lie in the largest component of the graph without the last color",
        ),
    ] {
        let clean = scalar_values(&results, key).iter().filter(|&&v| v == 0.0).count() as f64 / trials;
        report.row(n, key, "fraction_clean", clean);
        report.push(Verdict::new(
            check,
            statement,
            "0 violations",
            clean,
            format!("fraction of clean trials >= {}", cfg.min_fraction),
            clean >= cfg.min_fraction,
        ));
    }
    Ok(finish(report, clock))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_zeta_defers() {
        let cfg = CriticalWindowConfig {
            zeta_rule: ZetaRule::Fixed { zeta: 0.5 },
            n_grid: vec![300, 600],
            trials: 4,
            ..Default::default()
        };
        let r = critical_window(&cfg, 1).unwrap();
        assert_eq!(r.name, "regime_scaling");
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn bad_rest_intensity() {
        let cfg = CriticalWindowConfig {
            lambda_rest: 1.2,
            n_grid: vec![1000],
            ..Default::default()
        };
        assert!(matches!(critical_window(&cfg, 1), Err(Error::Regime(_))));
    }

    #[test]
    fn tiny_runs_report_columns() {
        let cfg = CriticalWindowConfig {
            zeta_rule: ZetaRule::Power { exponent: 0.5 },
            n_grid: vec![1000, 2000],
            trials: 10,
            ..Default::default()
        };
        let r = critical_window(&cfg, 2).unwrap();
        assert!(r.verdict("quantile_flat").is_some());
        assert!(r.value(2000, "ratio", "value").is_some());

        let i = intersection_structure(
            &IntersectionConfig {
                n: 1000,
                trials: 5,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        assert!(i.value(1000, "intersect.classes", "mean").is_some());
        let vacuous = intersection_structure(
            &IntersectionConfig {
                n: 1000,
                trials: 5,
                threshold: 1000,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        assert!(vacuous.passed());
        assert_eq!(vacuous.value(1000, "intersect.classes", "max"), Some(0.0));
    }
}
