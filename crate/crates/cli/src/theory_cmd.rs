use std::collections::BTreeMap;

use caperc::model::{ColorSet, ModelParams};
use caperc::theory::{
    asymptotic_tree_count, chernoff_bound, classify_regime, ell_cutoff, expected_tree_count,
    giant_size_estimate, lambda_i_star, m0_threshold, predicted_max_ca_scale, rate_i, s1_peak,
    Prediction, DEFAULT_WINDOW_TOLERANCE,
};
use clap::Subcommand;
use serde_json::{json, Value};

use crate::{parse_count, Failure};

#[derive(Subcommand)]
pub enum Predictor {
    /// t - 1 - ln t
    RateI {
        #[arg(long)]
        t: f64,
    },
    /// Exact expected number of tree components of size s.
    ExpectedTreeCount {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        s: u64,
    },
    /// Large-s approximation of the expected tree count.
    AsymptoticTreeCount {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        s: u64,
    },
    /// Size cutoff above which subcritical trees are rare.
    EllCutoff {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
    },
    /// ln n / (2 ln(1/q))
    M0Threshold {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        q: f64,
    },
    /// Peak index of the black-count sum.
    S1Peak {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        lambda: f64,
    },
    /// 2 exp(-delta^2 mu / 3)
    ChernoffBound {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Regime of an intensity vector.
    ClassifyRegime {
        #[arg(long, value_parser = parse_count)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_WINDOW_TOLERANCE)]
        window_tolerance: f64,
    },
    /// Predicted order of the largest color-avoiding class.
    MaxCaScale {
        #[arg(long, value_parser = parse_count)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_WINDOW_TOLERANCE)]
        window_tolerance: f64,
    },
    /// 2 (lambda - 1) n
    GiantSize {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        lambda: f64,
    },
    /// Total intensity minus the intensities of the given colors. Colors
    /// index the intensities sorted in non-increasing order.
    LambdaStar {
        #[arg(long, value_parser = parse_count)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        colors: Vec<usize>,
    },
}

fn prediction(name: &str, inputs: Value, value: Value, log_value: Option<f64>) -> Prediction {
    let inputs: BTreeMap<String, Value> = match inputs {
        Value::Object(m) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    };
    Prediction {
        name: name.to_string(),
        inputs,
        value,
        log_value,
        validity_warnings: Vec::new(),
    }
}

pub fn evaluate(p: &Predictor) -> Result<Prediction, Failure> {
    Ok(match *p {
        Predictor::RateI { t } => prediction("rate_I", json!({ "t": t }), json!(rate_i(t)?), None),
        Predictor::ExpectedTreeCount { n, lambda, s } => {
            let v = expected_tree_count(n, lambda, s)?;
            prediction(
                "expected_tree_count",
                json!({ "n": n, "lambda": lambda, "s": s }),
                json!(v.value),
                Some(v.log_value),
            )
        }
        Predictor::AsymptoticTreeCount { n, lambda, s } => {
            let v = asymptotic_tree_count(n, lambda, s)?;
            prediction(
                "asymptotic_tree_count",
                json!({ "n": n, "lambda": lambda, "s": s }),
                json!(v),
                Some(v.ln()),
            )
        }
        Predictor::EllCutoff { n, lambda, omega } => prediction(
            "ell_cutoff",
            json!({ "n": n, "lambda": lambda, "omega": omega }),
            json!(ell_cutoff(n, lambda, omega)?),
            None,
        ),
        Predictor::M0Threshold { n, q } => prediction(
            "m0_threshold",
            json!({ "n": n, "q": q }),
            json!(m0_threshold(n, q)?),
            None,
        ),
        Predictor::S1Peak { m, q, lambda } => prediction(
            "s1_peak",
            json!({ "M": m, "q": q, "lambda": lambda }),
            json!(s1_peak(m, q, lambda)?),
            None,
        ),
        Predictor::ChernoffBound { mu, delta } => prediction(
            "chernoff_bound",
            json!({ "mu": mu, "delta": delta }),
            json!(chernoff_bound(mu, delta)?),
            None,
        ),
        Predictor::ClassifyRegime {
            n,
            ref lambda,
            window_tolerance,
        } => {
            let params = ModelParams::new(n, lambda.clone())?;
            prediction(
                "classify_regime",
                json!({ "n": n, "lambdas": params.lambdas(), "window_tolerance": window_tolerance }),
                serde_json::to_value(classify_regime(&params, window_tolerance))?,
                None,
            )
        }
        Predictor::MaxCaScale {
            n,
            ref lambda,
            window_tolerance,
        } => {
            let params = ModelParams::new(n, lambda.clone())?;
            let label = classify_regime(&params, window_tolerance);
            let scale = predicted_max_ca_scale(&label, n as f64, params.k())?;
            let mut p = prediction(
                "predicted_max_ca_scale",
                json!({ "n": n, "lambdas": params.lambdas(), "window_tolerance": window_tolerance }),
                serde_json::to_value(scale)?,
                None,
            );
            p.inputs.insert("regime".into(), serde_json::to_value(label.kind)?);
            p
        }
        Predictor::GiantSize { n, lambda } => {
            let (v, warnings) = giant_size_estimate(n, lambda)?;
            let mut p = prediction(
                "giant_size_estimate",
                json!({ "n": n, "lambda": lambda }),
                json!(v),
                None,
            );
            p.validity_warnings = warnings;
            p
        }
        Predictor::LambdaStar {
            n,
            ref lambda,
            ref colors,
        } => {
            let params = ModelParams::new(n, lambda.clone())?;
            let set = ColorSet::from_colors(colors)?;
            prediction(
                "lambda_I_star",
                json!({ "n": n, "lambdas": params.lambdas(), "colors": colors }),
                json!(lambda_i_star(&params, set)?),
                None,
            )
        }
    })
}
