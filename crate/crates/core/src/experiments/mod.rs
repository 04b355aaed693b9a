//! Named experiment presets.
//!
//! Each preset runs batches of trials over an `n` grid, summarizes them into
//! a long-format results table (`n,metric,stat,value`) and a list of
//! [`Verdict`]s comparing observations with the closed-form predictions in
//! [`crate::theory`]. Presets are pure functions of their configuration; all
//! parallelism is delegated to [`crate::montecarlo`].

mod critical;
mod poisson;
mod regime;
mod subcritical;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{aggregate, run_trials, RunManifest, Summary, TrialResult, TrialSpec};
use crate::output::{emit_csv, emit_svg, Axes, Cell, Series, Table};

pub use critical::{critical_window, intersection_structure, CriticalWindowConfig, IntersectionConfig};
pub use poisson::{poisson_chi_square, poisson_small_components, PoissonConfig};
pub use regime::{regime_scaling, RegimeScalingConfig};
pub use subcritical::{
    black_threshold, giant_lln, tree_census, BlackThresholdConfig, GiantLlnConfig, TreeCensusConfig,
};

/// One checked statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Short machine-friendly id, e.g. `ratio_in_band`.
    pub check: String,
    /// The property being tested, in words.
    pub statement: String,
    /// Predicted value or `"estimated"` when the constant is unknown.
    pub predicted: String,
    pub observed: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Verdict {
    pub fn new(
        check: impl Into<String>,
        statement: impl Into<String>,
        predicted: impl Into<String>,
        observed: f64,
        tolerance: impl Into<String>,
        pass: bool,
    ) -> Self {
        Verdict {
            check: check.into(),
            statement: statement.into(),
            predicted: predicted.into(),
            observed,
            tolerance: tolerance.into(),
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    /// Long format: `n,metric,stat,value`.
    pub results: Table,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    pub manifest: RunManifest,
    pub plot: Option<(Series, Axes)>,
}

impl ExperimentReport {
    fn new(name: &str, manifest: RunManifest) -> Self {
        ExperimentReport {
            name: name.to_string(),
            results: Table::new(["n", "metric", "stat", "value"]),
            verdicts: Vec::new(),
            warnings: Vec::new(),
            manifest,
            plot: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }

    /// Looks up a single result value.
    pub fn value(&self, n: usize, metric: &str, stat: &str) -> Option<f64> {
        self.results.rows.iter().find_map(|r| match (&r[0], &r[1], &r[2], &r[3]) {
            (Cell::Int(rn), Cell::Text(m), Cell::Text(s), Cell::Float(v))
                if *rn as usize == n && m == metric && s == stat =>
            {
                Some(*v)
            }
            _ => None,
        })
    }

    pub fn verdict_table(&self) -> Table {
        let mut t = Table::new(["check", "statement", "predicted", "observed", "tolerance", "pass"]);
        for v in &self.verdicts {
            t.push(vec![
                v.check.clone().into(),
                v.statement.clone().into(),
                v.predicted.clone().into(),
                v.observed.into(),
                v.tolerance.clone().into(),
                v.pass.into(),
            ]);
        }
        t
    }

    pub fn write_results_csv<W: Write>(&self, sink: W) -> Result<()> {
        emit_csv(&self.results, sink)
    }

    pub fn write_verdicts_csv<W: Write>(&self, sink: W) -> Result<()> {
        emit_csv(&self.verdict_table(), sink)
    }

    /// Writes `results.csv`, `verdicts.csv`, `manifest.json` and, when the
    /// preset has one, `plot.svg` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_results_csv(fs::File::create(dir.join("results.csv"))?)?;
        self.write_verdicts_csv(fs::File::create(dir.join("verdicts.csv"))?)?;
        let manifest = serde_json::json!({
            "experiment": self.name,
            "manifest": self.manifest,
            "warnings": self.warnings,
            "passed": self.passed(),
        });
        let mut f = fs::File::create(dir.join("manifest.json"))?;
        serde_json::to_writer_pretty(&mut f, &manifest)?;
        f.write_all(b"\n")?;
        if let Some((series, axes)) = &self.plot {
            emit_svg(series, axes, fs::File::create(dir.join("plot.svg"))?)?;
        }
        Ok(())
    }

    fn row(&mut self, n: usize, metric: &str, stat: &str, value: f64) {
        self.results
            .push(vec![n.into(), metric.into(), stat.into(), value.into()]);
    }

    fn summary_rows(&mut self, n: usize, metric: &str, s: &Summary) {
        self.row(n, metric, "count", s.count as f64);
        self.row(n, metric, "mean", s.mean);
        self.row(n, metric, "sd", s.sd);
        self.row(n, metric, "min", s.min);
        for &(p, v) in &s.quantiles {
            self.row(n, metric, &format!("q{p:02}"), v);
        }
        self.row(n, metric, "max", s.max);
    }

    fn push(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }
}

/// How the critical-window offset `zeta` depends on `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ZetaRule {
    /// `zeta = 1 / ln n`
    InvLog,
    /// `zeta = n^(-exponent)`
    Power { exponent: f64 },
    /// `zeta` fixed, independent of `n`.
    Fixed { zeta: f64 },
}

impl ZetaRule {
    pub fn zeta(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            ZetaRule::InvLog => 1.0 / nf.ln(),
            ZetaRule::Power { exponent } => nf.powf(-exponent),
            ZetaRule::Fixed { zeta } => zeta,
        }
    }

    /// True when the rule drives `zeta` to zero.
    pub fn vanishes(&self) -> bool {
        match *self {
            ZetaRule::InvLog => true,
            ZetaRule::Power { exponent } => exponent > 0.0,
            ZetaRule::Fixed { .. } => false,
        }
    }
}

impl FromStr for ZetaRule {
    type Err = Error;

    /// Accepts `inv-log`, `pow:<exponent>` (`zeta = n^-exponent`) or a plain
    /// number / `fixed:<zeta>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("unknown zeta rule '{s}' (inv-log, pow:<e>, fixed:<z>)"));
        if s == "inv-log" {
            return Ok(ZetaRule::InvLog);
        }
        if let Some(e) = s.strip_prefix("pow:") {
            let exponent: f64 = e.parse().map_err(|_| bad())?;
            return Ok(ZetaRule::Power { exponent });
        }
        let z = s.strip_prefix("fixed:").unwrap_or(s);
        let zeta: f64 = z.parse().map_err(|_| bad())?;
        Ok(ZetaRule::Fixed { zeta })
    }
}

/// Runs one batch of trials and returns the per-trial results.
fn run_batch(
    spec: &TrialSpec,
    workers: usize,
    manifest: &mut RunManifest,
    grid_key: String,
) -> Result<Vec<TrialResult>> {
    let results = run_trials(spec, workers)?;
    manifest
        .trial_seeds
        .push((grid_key, results.iter().map(|r| r.seed).collect()));
    Ok(results)
}

fn summarize(results: &[TrialResult], metric: &str) -> Result<Summary> {
    let agg = aggregate(results)?;
    agg.scalars
        .get(metric)
        .cloned()
        .ok_or_else(|| Error::Invariant(format!("metric {metric} missing from results")))
}

fn check_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::InvalidParams("empty n grid".into()));
    }
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParams(format!("n grid {n_grid:?} is not increasing")));
    }
    Ok(())
}

/// `(max - min) / mean` of a sequence of positive values.
pub fn relative_spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (hi - lo) / mean
}

pub fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

pub fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    format!("[{}]", parts.join(" "))
}

fn start_clock() -> Instant {
    Instant::now()
}

fn finish(mut report: ExperimentReport, clock: Instant) -> ExperimentReport {
    report.manifest.wall_time_seconds = clock.elapsed().as_secs_f64();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_rules() {
        assert_eq!("inv-log".parse::<ZetaRule>().unwrap(), ZetaRule::InvLog);
        assert_eq!(
            "pow:0.5".parse::<ZetaRule>().unwrap(),
            ZetaRule::Power { exponent: 0.5 }
        );
        assert_eq!("0.5".parse::<ZetaRule>().unwrap(), ZetaRule::Fixed { zeta: 0.5 });
        assert!("nope".parse::<ZetaRule>().is_err());
        assert!((ZetaRule::Power { exponent: 0.5 }.zeta(10_000) - 0.01).abs() < 1e-15);
        assert!(!ZetaRule::Fixed { zeta: 0.5 }.vanishes());
    }

    #[test]
    fn trend_helpers() {
        assert!((relative_spread(&[1.0, 1.2, 0.8]) - 0.4).abs() < 1e-12);
        assert!(non_increasing(&[3.0, 3.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0, 1.0]));
        assert!(strictly_increasing(&[1.0, 2.0]));
        assert!(check_grid(&[10, 5]).is_err());
        assert!(check_grid(&[]).is_err());
    }
}
