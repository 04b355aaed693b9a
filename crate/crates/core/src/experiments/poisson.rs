use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{finish, start_clock, run_batch, summarize, ExperimentReport, Verdict};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::montecarlo::{scalar_values, Metric, RunManifest, TrialSpec};
use crate::output::{Axes, Series};
use crate::theory::{classify_regime, RegimeKind, DEFAULT_WINDOW_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoissonConfig {
    pub lambdas: Vec<f64>,
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub dispersion_low: f64,
    pub dispersion_high: f64,
    pub max_abs_correlation: f64,
    pub bounded_fraction: f64,
}

impl Default for PoissonConfig {
    fn default() -> Self {
        PoissonConfig {
            lambdas: vec![0.4, 0.4],
            n: 100_000,
            trials: 500,
            master_seed: 1,
            dispersion_low: 0.7,
            dispersion_high: 1.3,
            max_abs_correlation: 0.15,
            bounded_fraction: 0.95,
        }
    }
}

/// Pearson chi-square statistic of integer `values` against Poisson(mean),
/// with neighbouring bins pooled until each expects at least 5. Returns
/// `(statistic, degrees of freedom, p-value)`, or `None` when fewer than
/// three pooled bins remain.
pub fn poisson_chi_square(values: &[f64], mean: f64) -> Option<(f64, f64, f64)> {
    let t = values.len() as f64;
    let top = values.iter().copied().fold(0.0, f64::max) as usize;
    let mut observed = vec![0.0; top + 1];
    for &v in values {
        observed[v as usize] += 1.0;
    }
    let mut expected = Vec::with_capacity(top + 1);
    let mut pmf = (-mean).exp();
    let mut mass = 0.0;
    for v in 0..=top {
        if v > 0 {
            pmf *= mean / v as f64;
        }
        expected.push(t * pmf);
        mass += pmf;
    }
    // the last bin takes the upper tail
    expected[top] += t * (1.0 - mass).max(0.0);

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for v in 0..=top {
        o += observed[v];
        e += expected[v];
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    if bins.len() < 3 {
        return None;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (bins.len() - 2) as f64;
    let p = ChiSquared::new(df).ok()?.sf(stat);
    Some((stat, df, p))
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Distribution of the number of color-avoiding classes of each size
/// `2..=k` in the subcritical regime: dispersion, Poisson goodness of fit and
/// pairwise correlations.
pub fn poisson_small_components(cfg: &PoissonConfig, workers: usize) -> Result<ExperimentReport> {
    let params = ModelParams::new(cfg.n, cfg.lambdas.clone())?;
    let label = classify_regime(&params, DEFAULT_WINDOW_TOLERANCE);
    if label.kind != RegimeKind::Subcritical {
        return Err(Error::Regime(format!(
            "small-class counts need the subcritical regime, got {:?}",
            label.kind
        )));
    }
    let k = params.k();
    let n = cfg.n;

    let clock = start_clock();
    let mut report = ExperimentReport::new(
        "poisson_small_components",
        RunManifest::new(serde_json::to_value(cfg)?, cfg.master_seed, workers),
    );
    let spec = TrialSpec {
        params,
        metrics: vec![Metric::CaCensus],
        master_seed: cfg.master_seed,
        trials: cfg.trials,
    };
    let results = run_batch(&spec, workers, &mut report.manifest, n.to_string())?;

    let counts: Vec<Vec<f64>> = (2..=k)
        .map(|l| scalar_values(&results, &format!("ca.N_{l}")))
        .collect();
    let mut points = Vec::new();
    for (l, values) in (2..=k).zip(&counts) {
        let metric = format!("N_{l}");
        let s = summarize(&results, &format!("ca.N_{l}"))?;
        report.summary_rows(n, &metric, &s);
        let dispersion = if s.mean > 0.0 { s.variance() / s.mean } else { f64::NAN };
        report.row(n, &metric, "dispersion", dispersion);
        if let Some((stat, df, p)) = poisson_chi_square(values, s.mean) {
            report.row(n, &metric, "chi_square", stat);
            report.row(n, &metric, "chi_square_df", df);
            report.row(n, &metric, "chi_square_p", p);
        }
        points.push((l as f64, s.mean));
        if l == 2 {
            report.push(Verdict::new(
                "poisson_dispersion",
                "variance / mean of the number of size-2 classes is near 1",
                "1",
                dispersion,
                format!("[{}, {}]", cfg.dispersion_low, cfg.dispersion_high),
                (cfg.dispersion_low..=cfg.dispersion_high).contains(&dispersion),
            ));
        }
    }

    if k >= 3 {
        let mut worst = 0.0f64;
        for a in 0..counts.len() {
            for b in a + 1..counts.len() {
                let r = correlation(&counts[a], &counts[b]);
                report.row(n, &format!("corr_N_{}_N_{}", a + 2, b + 2), "value", r);
                worst = worst.max(r.abs());
            }
        }
        report.push(Verdict::new(
            "asymptotic_independence",
            "counts of classes of different sizes are uncorrelated",
            "0",
            worst,
            format!("max |corr| < {}", cfg.max_abs_correlation),
            worst < cfg.max_abs_correlation,
        ));
    }

    let max_ca = summarize(&results, "max_ca")?;
    report.summary_rows(n, "max_ca", &max_ca);
    let values = scalar_values(&results, "max_ca");
    let frac = values.iter().filter(|&&v| v <= k as f64).count() as f64 / values.len() as f64;
    report.row(n, "max_ca_le_k", "fraction", frac);
    report.push(Verdict::new(
        "bounded_by_k",
        format!("max_ca <= {k} in most trials"),
        k.to_string(),
        frac,
        format!("fraction >= {}", cfg.bounded_fraction),
        frac >= cfg.bounded_fraction,
    ));

    report.plot = Some((
        Series {
            label: format!("n = {n}"),
            points,
        },
        Axes {
            title: "small color-avoiding classes".into(),
            x_label: "class size".into(),
            y_label: "mean count".into(),
            x_log: false,
            y_log: false,
        },
    ));
    Ok(finish(report, clock))
}
