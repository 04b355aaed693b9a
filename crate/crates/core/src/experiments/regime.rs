use serde::{Deserialize, Serialize};

use super::{
    check_grid, finish, relative_spread, run_batch, start_clock, strictly_decreasing,
    strictly_increasing, summarize, ExperimentReport, Verdict,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::montecarlo::{scalar_values, Metric, RunManifest, TrialSpec};
use crate::output::{Axes, Series};
use crate::theory::{classify_regime, RegimeKind, DEFAULT_WINDOW_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegimeScalingConfig {
    pub lambdas: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub master_seed: u64,
    pub window_tolerance: f64,
    /// Allowed relative spread of `max_ca / n` means (supercritical).
    pub linear_spread: f64,
    /// Allowed relative spread of `max_ca / ln n` means (intermediate).
    pub log_spread: f64,
    /// Required fraction of trials with `max_ca <= k` (subcritical).
    pub bounded_fraction: f64,
}

impl Default for RegimeScalingConfig {
    fn default() -> Self {
        RegimeScalingConfig {
            lambdas: vec![1.3, 0.4],
            n_grid: vec![10_000, 30_000, 100_000],
            trials: 30,
            master_seed: 1,
            window_tolerance: DEFAULT_WINDOW_TOLERANCE,
            linear_spread: 0.15,
            log_spread: 0.25,
            bounded_fraction: 0.95,
        }
    }
}

/// Largest color-avoiding class across an `n` grid, normalized by `n` and by
/// `ln n`; the verdict checks the normalization expected for the regime.
pub fn regime_scaling(cfg: &RegimeScalingConfig, workers: usize) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid)?;
    let clock = start_clock();
    let probe = ModelParams::new(cfg.n_grid[cfg.n_grid.len() - 1], cfg.lambdas.clone())?;
    let label = classify_regime(&probe, cfg.window_tolerance);
    let k = probe.k();
    match label.kind {
        RegimeKind::Supercritical | RegimeKind::Intermediate | RegimeKind::Subcritical => {}
        other => {
            return Err(Error::Regime(format!(
                "regime scaling needs a supercritical, intermediate or subcritical \
                 parameter set, got {other:?}"
            )))
        }
    }

    let mut report = ExperimentReport::new(
        "regime_scaling",
        RunManifest::new(serde_json::to_value(cfg)?, cfg.master_seed, workers),
    );
    let mut by_n = Vec::new();
    let mut by_log = Vec::new();
    let mut bounded = Vec::new();
    for &n in &cfg.n_grid {
        let spec = TrialSpec {
            params: ModelParams::new(n, cfg.lambdas.clone())?,
            metrics: vec![Metric::MaxCa],
            master_seed: cfg.master_seed,
            trials: cfg.trials,
        };
        let results = run_batch(&spec, workers, &mut report.manifest, n.to_string())?;
        let s = summarize(&results, "max_ca")?;
        let ln_n = (n as f64).ln();
        report.summary_rows(n, "max_ca", &s);
        report.row(n, "max_ca_over_n", "mean", s.mean / n as f64);
        report.row(n, "max_ca_over_log_n", "mean", s.mean / ln_n);
        let values = scalar_values(&results, "max_ca");
        let frac = values.iter().filter(|&&v| v <= k as f64).count() as f64 / values.len() as f64;
        report.row(n, "max_ca_le_k", "fraction", frac);
        by_n.push(s.mean / n as f64);
        by_log.push(s.mean / ln_n);
        bounded.push(frac);
    }

    match label.kind {
        RegimeKind::Supercritical => {
            let spread = relative_spread(&by_n);
            report.push(Verdict::new(
                "linear_scale_stable",
                "max_ca / n means agree across the grid",
                "estimated",
                spread,
                format!("relative spread < {}", cfg.linear_spread),
                spread < cfg.linear_spread,
            ));
            report.push(Verdict::new(
                "log_scale_diverges",
                "max_ca / ln n means increase along the grid",
                "increasing",
                by_log[by_log.len() - 1] / by_log[0],
                "strictly increasing",
                strictly_increasing(&by_log),
            ));
        }
        RegimeKind::Intermediate => {
            let spread = relative_spread(&by_log);
            report.push(Verdict::new(
                "log_scale_stable",
                "max_ca / ln n means agree across the grid",
                "estimated",
                spread,
                format!("relative spread < {}", cfg.log_spread),
                spread < cfg.log_spread,
            ));
            report.push(Verdict::new(
                "linear_scale_vanishes",
                "max_ca / n means decrease along the grid",
                "decreasing",
                by_n[by_n.len() - 1] / by_n[0],
                "strictly decreasing",
                strictly_decreasing(&by_n),
            ));
        }
        _ => {
            let worst = bounded.iter().copied().fold(f64::INFINITY, f64::min);
            report.push(Verdict::new(
                "bounded_by_k",
                format!("max_ca <= {k} in most trials at every n"),
                k.to_string(),
                worst,
                format!("fraction >= {}", cfg.bounded_fraction),
                worst >= cfg.bounded_fraction,
            ));
        }
    }

    let (series, y_label) = match label.kind {
        RegimeKind::Supercritical => (&by_n, "mean max_ca / n"),
        RegimeKind::Intermediate => (&by_log, "mean max_ca / ln n"),
        _ => (&bounded, "fraction of trials with max_ca <= k"),
    };
    report.plot = Some((
        Series {
            label: format!("{:?}", label.kind),
            points: cfg.n_grid.iter().map(|&n| n as f64).zip(series.iter().copied()).collect(),
        },
        Axes {
            title: "largest color-avoiding class".into(),
            x_label: "n".into(),
            y_label: y_label.into(),
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
    fn unclassified_is_rejected() {
        let cfg = RegimeScalingConfig {
            lambdas: vec![0.9, 0.5, 0.5],
            n_grid: vec![100],
            trials: 1,
            ..Default::default()
        };
        assert!(matches!(regime_scaling(&cfg, 1), Err(Error::Regime(_))));
    }

    #[test]
    fn small_subcritical_run() {
        let cfg = RegimeScalingConfig {
            lambdas: vec![0.4, 0.4],
            n_grid: vec![500, 1000],
            trials: 20,
            ..Default::default()
        };
        let r = regime_scaling(&cfg, 1).unwrap();
        assert_eq!(r.verdicts.len(), 1);
        assert!(r.value(1000, "max_ca", "mean").is_some());
        assert_eq!(r.manifest.trial_seeds.len(), 2);
    }
}
