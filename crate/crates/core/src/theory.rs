//! Closed-form predictors and bounds that simulations are checked against.
//!
//! Quantities whose magnitude can over- or underflow are computed in log
//! space and returned as a [`LogValue`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{ColorSet, ModelParams};

/// Default half-width of the critical window in regime classification.
pub const DEFAULT_WINDOW_TOLERANCE: f64 = 1e-6;

/// A positive quantity together with its natural logarithm. `value`
/// underflows to zero (or overflows to infinity) where `log_value` does not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log_value: f64,
    pub value: f64,
}

impl LogValue {
    pub fn from_log(log_value: f64) -> Self {
        LogValue {
            log_value,
            value: log_value.exp(),
        }
    }
}

/// Large-deviation rate `t - 1 - ln t`: zero at `t = 1`, positive elsewhere.
pub fn rate_i(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("rate_I", format!("t = {t} must be positive")));
    }
    Ok(t - 1.0 - t.ln())
}

fn ln_binomial(n: f64, s: f64) -> f64 {
    // the falling-factorial sum keeps full precision when s << n
    if s <= 1024.0 {
        let mut acc = 0.0;
        let mut i = 0.0;
        while i < s {
            acc += (n - i).ln();
            i += 1.0;
        }
        acc - ln_gamma(s + 1.0)
    } else {
        ln_gamma(n + 1.0) - ln_gamma(s + 1.0) - ln_gamma(n - s + 1.0)
    }
}

/// Exact expected number of tree components of size `s` in G(n, lambda/n),
/// from Cayley's count of labelled trees.
pub fn expected_tree_count(n: f64, lambda: f64, s: u64) -> Result<LogValue> {
    const NAME: &str = "expected_tree_count";
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::domain(NAME, format!("n = {n} must be at least 1")));
    }
    if s < 1 || s as f64 > n {
        return Err(Error::domain(NAME, format!("s = {s} not in 1..=n")));
    }
    if !(lambda > 0.0 && lambda < n) {
        return Err(Error::domain(NAME, format!("lambda = {lambda} not in (0, n)")));
    }
    let sf = s as f64;
    let p = lambda / n;
    let absent = sf * (n - sf) + (sf - 1.0) * (sf - 2.0) / 2.0;
    let log = ln_binomial(n, sf)
        + (sf - 2.0) * sf.ln()
        + (sf - 1.0) * p.ln()
        + absent * (-p).ln_1p();
    Ok(LogValue::from_log(log))
}

/// Large-`s` approximation `n e^{-I s} / (lambda sqrt(2 pi s^5))` of the
/// expected tree count, for `lambda` in (0, 1).
pub fn asymptotic_tree_count(n: f64, lambda: f64, s: u64) -> Result<f64> {
    const NAME: &str = "asymptotic_tree_count";
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(NAME, format!("lambda = {lambda} not in (0, 1)")));
    }
    if s < 1 {
        return Err(Error::domain(NAME, "s must be at least 1"));
    }
    let sf = s as f64;
    Ok(n * (-rate_i(lambda)? * sf).exp() / (lambda * (2.0 * PI * sf.powi(5)).sqrt()))
}

/// Size above which subcritical trees become rare:
/// `(ln n - 2.5 ln ln n) / I(lambda) - omega`.
pub fn ell_cutoff(n: f64, lambda: f64, omega: f64) -> Result<f64> {
    const NAME: &str = "ell_cutoff";
    if !(n >= 3.0) {
        return Err(Error::domain(NAME, format!("n = {n} must be at least 3")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(NAME, format!("lambda = {lambda} not in (0, 1)")));
    }
    if !(omega >= 0.0) {
        return Err(Error::domain(NAME, format!("omega = {omega} must be non-negative")));
    }
    let ln_n = n.ln();
    Ok((ln_n - 2.5 * ln_n.ln()) / rate_i(lambda)? - omega)
}

/// `ln n / (2 ln(1/q))`.
pub fn m0_threshold(n: f64, q: f64) -> Result<f64> {
    const NAME: &str = "m0_threshold";
    if !(n >= 2.0) {
        return Err(Error::domain(NAME, format!("n = {n} must be at least 2")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(NAME, format!("q = {q} not in (0, 1)")));
    }
    Ok(n.ln() / (2.0 * (1.0 / q).ln()))
}

/// Location `M / (1 - (1 - q) e^{-I(lambda)})` of the dominant term of the
/// black-count sum.
pub fn s1_peak(m: f64, q: f64, lambda: f64) -> Result<f64> {
    const NAME: &str = "s1_peak";
    if !(m >= 1.0) {
        return Err(Error::domain(NAME, format!("M = {m} must be at least 1")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(NAME, format!("q = {q} not in (0, 1)")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(NAME, format!("lambda = {lambda} not in (0, 1)")));
    }
    Ok(m / (1.0 - (1.0 - q) * (-rate_i(lambda)?).exp()))
}

/// Two-sided Chernoff bound `2 exp(-delta^2 mu / 3)` on
/// `P(|X - mu| >= delta mu)` for binomial `X` with mean `mu`.
pub fn chernoff_bound(mu: f64, delta: f64) -> Result<f64> {
    const NAME: &str = "chernoff_bound";
    if !(mu >= 0.0) {
        return Err(Error::domain(NAME, format!("mu = {mu} must be non-negative")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(NAME, format!("delta = {delta} not in (0, 1)")));
    }
    Ok(2.0 * (-delta * delta * mu / 3.0).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum RegimeKind {
    Supercritical,
    Intermediate,
    Subcritical,
    CriticalWindow { zeta: f64 },
    Unclassified,
}

/// Regime together with the deleted-color intensities that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub kind: RegimeKind,
    pub lambda_star_first: f64,
    pub lambda_star_second_last: f64,
    pub lambda_star_last: f64,
}

/// Classifies parameters by the smallest, second largest and largest
/// deleted-color intensity.
///
/// Checked in order: supercritical (smallest > 1); critical window (largest
/// within `window_tolerance` of 1 and second largest < 1); intermediate
/// (largest > 1 > second largest); subcritical (largest < 1). Anything else,
/// e.g. second largest >= 1 >= smallest, is `Unclassified`.
pub fn classify_regime(params: &ModelParams, window_tolerance: f64) -> RegimeLabel {
    let star = params.lambda_star();
    let k = star.len();
    let first = star[0];
    let second_last = star[k - 2];
    let last = star[k - 1];
    let kind = if first > 1.0 {
        RegimeKind::Supercritical
    } else if (last - 1.0).abs() <= window_tolerance && second_last < 1.0 {
        RegimeKind::CriticalWindow { zeta: last - 1.0 }
    } else if last > 1.0 && second_last < 1.0 {
        RegimeKind::Intermediate
    } else if last < 1.0 {
        RegimeKind::Subcritical
    } else {
        RegimeKind::Unclassified
    };
    RegimeLabel {
        kind,
        lambda_star_first: first,
        lambda_star_second_last: second_last,
        lambda_star_last: last,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKind {
    /// `a n` with an unknown constant `a`.
    Linear,
    /// `a ln n` with an unknown constant `a`.
    Logarithmic,
    /// At most `k` with high probability.
    Bounded,
    /// `ln n / ln(1/zeta)` with constant 1.
    CriticalRatio,
    /// Tight, with no explicit scale.
    Tight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePrediction {
    pub kind: ScaleKind,
    /// The scale itself (`n`, `ln n`, `k`, or the critical ratio).
    pub value: Option<f64>,
    /// Whether the leading constant in front of `value` is known (and 1).
    pub constant_known: bool,
}

/// Predicted order of the largest color-avoiding class.
pub fn predicted_max_ca_scale(label: &RegimeLabel, n: f64, k: usize) -> Result<ScalePrediction> {
    let pred = |kind, value, constant_known| ScalePrediction {
        kind,
        value,
        constant_known,
    };
    Ok(match label.kind {
        RegimeKind::Supercritical => pred(ScaleKind::Linear, Some(n), false),
        RegimeKind::Intermediate => pred(ScaleKind::Logarithmic, Some(n.ln()), false),
        RegimeKind::Subcritical => pred(ScaleKind::Bounded, Some(k as f64), true),
        RegimeKind::CriticalWindow { zeta } if zeta > 0.0 && zeta < 1.0 => pred(
            ScaleKind::CriticalRatio,
            Some(n.ln() / (1.0 / zeta).ln()),
            true,
        ),
        RegimeKind::CriticalWindow { .. } => pred(ScaleKind::Tight, None, false),
        RegimeKind::Unclassified => {
            return Err(Error::Regime(format!(
                "no prediction when the second largest deleted-color intensity ({}) \
                 is at least 1 and the smallest ({}) is at most 1",
                label.lambda_star_second_last, label.lambda_star_first
            )))
        }
    })
}

/// `2 (lambda - 1) n`, the giant component size just above criticality,
/// with warnings when `lambda - 1` is outside `[5 n^{-1/3}, 0.2]`.
pub fn giant_size_estimate(n: f64, lambda: f64) -> Result<(f64, Vec<String>)> {
    if !(lambda > 1.0) {
        return Err(Error::domain(
            "giant_size_estimate",
            format!("lambda = {lambda} must exceed 1"),
        ));
    }
    let eps = lambda - 1.0;
    let lo = 5.0 * n.powf(-1.0 / 3.0);
    let mut warnings = Vec::new();
    if eps < lo || eps > 0.2 {
        warnings.push(format!(
            "lambda - 1 = {eps} outside validity window [{lo}, 0.2] for n = {n}"
        ));
    }
    Ok((2.0 * eps * n, warnings))
}

/// Total intensity minus the intensities of `colors`.
pub fn lambda_i_star(params: &ModelParams, colors: ColorSet) -> Result<f64> {
    colors.check(params.k())?;
    Ok(params.lambda_star_of(colors))
}

/// Machine-readable predictor output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub name: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub value: serde_json::Value,
    pub log_value: Option<f64>,
    pub validity_warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn rate_values() {
        assert_eq!(rate_i(1.0).unwrap(), 0.0);
        assert!(close(rate_i(0.5).unwrap(), 0.193_147_180_559_945_3, 1e-14));
        assert!(close(rate_i(2.0).unwrap(), 0.306_852_819_440_054_7, 1e-14));
        assert!(rate_i(0.0).is_err());
        assert!(rate_i(-1.0).is_err());
    }

    #[test]
    fn rate_is_strictly_convex_with_min_at_one() {
        let grid: Vec<f64> = (1..400).map(|i| i as f64 * 0.01).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| rate_i(t).unwrap()).collect();
        for w in vals.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] > 0.0);
        }
        for (&t, &v) in grid.iter().zip(&vals) {
            if (t - 1.0).abs() > 1e-9 {
                assert!(v > 0.0, "I({t}) = {v}");
            }
        }
    }

    #[test]
    fn tree_count_specializations() {
        // s = 1 collapses to n (1 - lambda/n)^(n-1)
        let (n, l): (f64, f64) = (50.0, 0.7);
        let direct = n * (1.0 - l / n).powf(n - 1.0);
        assert!(close(expected_tree_count(n, l, 1).unwrap().value, direct, 1e-13));
        assert!(close(expected_tree_count(4.0, 1.0, 2).unwrap().value, 0.474609375, 1e-13));
    }

    #[test]
    fn tree_count_matches_direct_product_for_small_n() {
        fn direct(n: u64, l: f64, s: u64) -> f64 {
            let mut binom = 1.0;
            for i in 0..s {
                binom *= (n - i) as f64 / (i + 1) as f64;
            }
            let p = l / n as f64;
            let absent = s * (n - s) + (s - 1) * s.saturating_sub(2) / 2;
            binom
                * (s as f64).powi(s as i32 - 2)
                * p.powi(s as i32 - 1)
                * (1.0 - p).powi(absent as i32)
        }
        for n in 1..=30u64 {
            for s in 1..=n {
                for l in [0.1, 0.5, 0.9, 1.7] {
                    if l >= n as f64 {
                        continue;
                    }
                    let a = expected_tree_count(n as f64, l, s).unwrap().value;
                    let b = direct(n, l, s);
                    assert!(close(a, b, 1e-10), "n={n} s={s} l={l}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn tree_counts_fit_in_n() {
        let total: f64 = (1..=200)
            .map(|s| s as f64 * expected_tree_count(1000.0, 0.5, s).unwrap().value)
            .sum();
        assert!(total <= 1000.0, "{total}");
    }

    #[test]
    fn tree_count_domain() {
        assert!(expected_tree_count(10.0, 0.5, 0).is_err());
        assert!(expected_tree_count(10.0, 0.5, 11).is_err());
        assert!(expected_tree_count(10.0, 0.0, 2).is_err());
        assert!(expected_tree_count(10.0, 10.0, 2).is_err());
    }

    #[test]
    fn asymptotic_vs_exact() {
        let ratio = |n: f64, s: u64| {
            asymptotic_tree_count(n, 0.5, s).unwrap() / expected_tree_count(n, 0.5, s).unwrap().value
        };
        // reference ratios from 30-digit evaluation
        assert!(close(ratio(1e5, 10), 1.0 / 0.991_562_718_420_341, 1e-9));
        assert!((ratio(1e5, 10) - 1.0).abs() < 0.02);
        let seq: Vec<f64> = [10, 20, 30, 40, 50].iter().map(|&s| ratio(1e8, s)).collect();
        assert!(seq.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()));
        assert!((seq[4] - 1.0).abs() < 0.01);
        assert!(close(seq[4], 1.001_673_736_084_257, 1e-7));
    }

    #[test]
    fn asymptotic_structure() {
        let e = std::f64::consts::E;
        let v = asymptotic_tree_count(e, 0.5, 1).unwrap();
        let want = e * (-rate_i(0.5).unwrap()).exp() / (0.5 * (2.0 * PI).sqrt());
        assert!(close(v, want, 1e-15));
        assert!(close(v, 1.787_935_257_770_844_4, 1e-13));
        let a = asymptotic_tree_count(1e6, 0.3, 7).unwrap();
        assert_eq!(asymptotic_tree_count(2e6, 0.3, 7).unwrap(), 2.0 * a);
        assert!(asymptotic_tree_count(1e6, 1.0, 7).is_err());
    }

    #[test]
    fn ell_values() {
        let l = ell_cutoff(1e6, 0.5, 0.0).unwrap();
        assert!(close(l, 37.541_478_735_299_54, 1e-12));
        assert!(close(ell_cutoff(1e6, 0.5, 1.0).unwrap(), l - 1.0, 1e-14));
        assert!(ell_cutoff(1e7, 0.5, 0.0).unwrap() > l);
        assert!(ell_cutoff(2.0, 0.5, 0.0).is_err());
        assert!(ell_cutoff(1e6, 1.5, 0.0).is_err());
    }

    #[test]
    fn m0_values() {
        let n: f64 = 12345.0;
        assert!(close(m0_threshold(n, 1.0 / n).unwrap(), 0.5, 1e-14));
        assert!(close(m0_threshold(1e6, 0.05).unwrap(), 2.305_865_360_520_722, 1e-13));
        assert!(close(m0_threshold(1e12, 0.05).unwrap(), 2.0 * m0_threshold(1e6, 0.05).unwrap(), 1e-14));
        assert!(m0_threshold(1e6, 1.0).is_err());
    }

    #[test]
    fn s1_values() {
        assert!(close(s1_peak(5.0, 0.05, 0.5).unwrap(), 23.056_626_532_466_81, 1e-12));
        assert!(close(s1_peak(5.0, 1.0 - 1e-12, 0.5).unwrap(), 5.0, 1e-9));
        for q in [0.01, 0.2, 0.7] {
            assert!(s1_peak(3.0, q, 0.4).unwrap() >= 3.0);
        }
        assert!(s1_peak(0.5, 0.1, 0.5).is_err());
    }

    #[test]
    fn chernoff_values() {
        assert_eq!(chernoff_bound(0.0, 0.5).unwrap(), 2.0);
        assert!(close(chernoff_bound(300.0, 0.1).unwrap(), 0.735_758_882_342_884_6, 1e-14));
        assert!(chernoff_bound(10.0, 1.0).is_err());
        assert!(chernoff_bound(10.0, 0.0).is_err());
    }

    fn params(l: &[f64]) -> ModelParams {
        ModelParams::new(1000, l.to_vec()).unwrap()
    }

    #[test]
    fn regimes() {
        let t = DEFAULT_WINDOW_TOLERANCE;
        assert_eq!(classify_regime(&params(&[2.0, 1.5]), t).kind, RegimeKind::Supercritical);
        assert_eq!(classify_regime(&params(&[1.2, 0.5]), t).kind, RegimeKind::Intermediate);
        assert_eq!(classify_regime(&params(&[0.4, 0.4]), t).kind, RegimeKind::Subcritical);
        // second largest >= 1 > smallest is open
        assert_eq!(classify_regime(&params(&[1.0, 0.5, 0.3]), t).kind, RegimeKind::Unclassified);
        match classify_regime(&params(&[1.0 + 1e-8, 0.5]), t).kind {
            RegimeKind::CriticalWindow { zeta } => assert!((zeta - 1e-8).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let label = classify_regime(&params(&[1.2, 0.5]), t);
        assert_eq!(label.lambda_star_first, 0.5);
        assert_eq!(label.lambda_star_last, 1.2);
    }

    #[test]
    fn regime_ignores_input_order() {
        let a = classify_regime(&params(&[0.3, 1.1, 0.2]), 1e-6);
        let b = classify_regime(&params(&[1.1, 0.2, 0.3]), 1e-6);
        assert_eq!(a, b);
    }

    #[test]
    fn scale_predictions() {
        let sub = classify_regime(&params(&[0.3, 0.3, 0.3]), 1e-6);
        let p = predicted_max_ca_scale(&sub, 1e6, 3).unwrap();
        assert_eq!((p.kind, p.value), (ScaleKind::Bounded, Some(3.0)));

        let n: f64 = 1e6;
        let zeta = 1.0 / n.ln();
        let crit = RegimeLabel {
            kind: RegimeKind::CriticalWindow { zeta },
            lambda_star_first: 0.5,
            lambda_star_second_last: 0.5,
            lambda_star_last: 1.0 + zeta,
        };
        let p = predicted_max_ca_scale(&crit, n, 2).unwrap();
        assert_eq!(p.kind, ScaleKind::CriticalRatio);
        assert!(close(p.value.unwrap(), 5.261_464_353_591_486, 1e-12));
        assert!(p.constant_known);
        let bigger = predicted_max_ca_scale(&crit, 1e8, 2).unwrap();
        assert!(bigger.value.unwrap() > p.value.unwrap());

        let inter = classify_regime(&params(&[1.2, 0.5]), 1e-6);
        let p = predicted_max_ca_scale(&inter, n, 2).unwrap();
        assert_eq!(p.kind, ScaleKind::Logarithmic);
        assert!(!p.constant_known);

        let open = classify_regime(&params(&[1.0, 0.5, 0.3]), 1e-6);
        assert!(predicted_max_ca_scale(&open, n, 3).is_err());
    }

    #[test]
    fn giant_estimates() {
        let n: f64 = 1e6;
        let (v, w) = giant_size_estimate(n, 1.0 + n.powf(-0.25)).unwrap();
        assert!(close(v, 63_245.553_203_367_59, 1e-9));
        // 5 n^{-1/3} = 0.05 > n^{-1/4}
        assert_eq!(w.len(), 1);
        assert!(giant_size_estimate(1e9, 1.1).unwrap().1.is_empty());
        let (v2, _) = giant_size_estimate(n, 1.0 + 2.0 * n.powf(-0.25)).unwrap();
        assert!(close(v2, 2.0 * v, 1e-12));
        let (_, w) = giant_size_estimate(100.0, 1.000_000_1).unwrap();
        assert_eq!(w.len(), 1);
        assert!(giant_size_estimate(n, 1.0).is_err());
    }

    #[test]
    fn deleted_intensity() {
        let p = params(&[1.0, 0.5, 0.3]);
        assert!(close(lambda_i_star(&p, ColorSet::empty()).unwrap(), 1.8, 1e-15));
        assert_eq!(lambda_i_star(&p, ColorSet::full(3)).unwrap(), 0.0);
        let v = lambda_i_star(&p, ColorSet::from_colors(&[1, 3]).unwrap()).unwrap();
        assert!(close(v, 0.5, 1e-14));
        assert!(lambda_i_star(&p, ColorSet::single(4)).is_err());
    }
}
