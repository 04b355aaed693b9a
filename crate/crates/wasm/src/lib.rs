//! Browser bindings. Every export returns a JSON string.

use caperc::census::{ca_census, census};
use caperc::connectivity::{ca_partition, components};
use caperc::model::{sample_model, ColorSet, ModelParams};
use caperc::theory::{
    asymptotic_tree_count, classify_regime, ell_cutoff, expected_tree_count,
    predicted_max_ca_scale, DEFAULT_WINDOW_TOLERANCE,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: caperc::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Samples one graph and summarizes its color-avoiding partition.
#[wasm_bindgen]
pub fn sample_and_partition(n: usize, lambdas: &[f64], seed: u64) -> Result<String, JsError> {
    sample_json(n, lambdas, seed).map_err(js)
}

pub fn sample_json(n: usize, lambdas: &[f64], seed: u64) -> caperc::Result<String> {
    if n > 2_000_000 {
        return Err(caperc::Error::InvalidParams("demo is limited to n <= 2e6".into()));
    }
    let params = ModelParams::new(n, lambdas.to_vec())?;
    let g = sample_model(&params, seed)?;
    let p = ca_partition(&g)?;
    let small = ca_census(&p, g.k());
    let union = g.union_view(ColorSet::full(g.k()));
    let whole = census(&components(n, union.iter().copied())?, &union)?;
    let label = classify_regime(&params, DEFAULT_WINDOW_TOLERANCE);
    let sizes: Vec<(usize, usize)> = small.size_hist.iter().map(|(&s, &c)| (s, c)).collect();
    Ok(json!({
        "n": n,
        "lambdas": params.lambdas(),
        "edges_per_layer": g.layers().iter().map(Vec::len).collect::<Vec<_>>(),
        "regime": label.kind,
        "max_ca": small.max_ca_size,
        "ca_classes": p.labeling.component_count(),
        "ca_size_hist": sizes,
        "largest_component": whole.max_size,
        "components": whole.component_count(),
        "largest_without_color": p.source_labels.iter().map(|l| l.max_size()).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Expected and large-s tree counts for `s = 1..=s_max`.
#[wasm_bindgen]
pub fn tree_count_curve(n: f64, lambda: f64, s_max: u32) -> Result<String, JsError> {
    tree_curve_json(n, lambda, s_max).map_err(js)
}

pub fn tree_curve_json(n: f64, lambda: f64, s_max: u32) -> caperc::Result<String> {
    let mut points = Vec::new();
    for s in 1..=u64::from(s_max.min(500)) {
        if s as f64 > n {
            break;
        }
        let exact = expected_tree_count(n, lambda, s)?;
        // only defined below criticality
        let approx = asymptotic_tree_count(n, lambda, s).ok();
        points.push(json!({ "s": s, "expected": exact.value, "log_expected": exact.log_value, "asymptotic": approx }));
    }
    let ell = ell_cutoff(n, lambda, 1.0).ok();
    Ok(json!({ "n": n, "lambda": lambda, "ell": ell, "points": points }).to_string())
}

/// Regime and predicted scale of the largest color-avoiding class.
#[wasm_bindgen]
pub fn classify(n: usize, lambdas: &[f64]) -> Result<String, JsError> {
    classify_json(n, lambdas).map_err(js)
}

pub fn classify_json(n: usize, lambdas: &[f64]) -> caperc::Result<String> {
    let params = ModelParams::new(n, lambdas.to_vec())?;
    let label = classify_regime(&params, DEFAULT_WINDOW_TOLERANCE);
    let scale = predicted_max_ca_scale(&label, n as f64, params.k()).ok();
    Ok(json!({
        "label": label,
        "lambda_star": params.lambda_star(),
        "scale": scale,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_summary() {
        let v: serde_json::Value =
            serde_json::from_str(&sample_json(3000, &[1.3, 0.4], 2).unwrap()).unwrap();
        assert_eq!(v["regime"]["regime"], "intermediate");
        assert_eq!(v["edges_per_layer"].as_array().unwrap().len(), 2);
        assert!(v["max_ca"].as_u64().unwrap() >= 1);
        assert!(sample_json(3_000_000, &[1.0, 1.0], 2).is_err());
    }

    #[test]
    fn curve_and_classification() {
        let v: serde_json::Value =
            serde_json::from_str(&tree_curve_json(4.0, 1.0, 9).unwrap()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 4);
        assert!((v["points"][1]["expected"].as_f64().unwrap() - 0.474609375).abs() < 1e-12);
        assert!(v["points"][1]["asymptotic"].is_null());
        let v: serde_json::Value =
            serde_json::from_str(&tree_curve_json(1e5, 0.5, 30).unwrap()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 30);
        let v: serde_json::Value =
            serde_json::from_str(&classify_json(1000, &[0.4, 0.4]).unwrap()).unwrap();
        assert_eq!(v["label"]["kind"]["regime"], "subcritical");
        assert_eq!(v["scale"]["kind"], "bounded");
        assert!(classify_json(1000, &[1.0]).is_err());
    }
}
