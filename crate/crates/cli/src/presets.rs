//! `run <preset>`: effective configuration is the preset default, overlaid
//! by the `--config` JSON object, overlaid by command-line flags.

use std::path::PathBuf;

use caperc::experiments::{
    black_threshold, critical_window, giant_lln, intersection_structure, poisson_small_components,
    regime_scaling, tree_census, BlackThresholdConfig, CriticalWindowConfig, ExperimentReport,
    GiantLlnConfig, IntersectionConfig, PoissonConfig, RegimeScalingConfig, TreeCensusConfig,
    ZetaRule,
};
use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::{parse_count, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    RegimeScaling,
    CriticalWindow,
    IntersectionStructure,
    TreeCensus,
    BlackThreshold,
    PoissonSmallComponents,
    GiantLln,
}

#[derive(Args, Default)]
pub struct RunArgs {
    /// n grid, comma separated (`1e5,1e6`); single-n presets take one value.
    #[arg(long = "n", value_delimiter = ',', value_parser = parse_count)]
    pub n: Vec<usize>,
    /// Trials per grid point.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism). Never changes results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory (default: caperc-out/<preset>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON object with preset fields; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Intensities, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Black-vertex probability.
    #[arg(long)]
    pub q: Option<f64>,
    /// Critical offset rule: inv-log, pow:<a> or fixed:<zeta>.
    #[arg(long)]
    pub zeta: Option<String>,
    #[arg(long)]
    pub lambda_rest: Option<f64>,
    /// Giant preset: lambda = 1 + n^-exponent.
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Smallest class size checked by the intersection preset.
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Largest component size allowed by the tree census.
    #[arg(long)]
    pub size_cap: Option<usize>,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::RegimeScaling => "regime-scaling",
            Preset::CriticalWindow => "critical-window",
            Preset::IntersectionStructure => "intersection-structure",
            Preset::TreeCensus => "tree-census",
            Preset::BlackThreshold => "black-threshold",
            Preset::PoissonSmallComponents => "poisson-small-components",
            Preset::GiantLln => "giant-lln",
        }
    }

    fn defaults(self) -> Value {
        fn v<T: Serialize + Default>() -> Value {
            serde_json::to_value(T::default()).expect("config serializes")
        }
        match self {
            Preset::RegimeScaling => v::<RegimeScalingConfig>(),
            Preset::CriticalWindow => v::<CriticalWindowConfig>(),
            Preset::IntersectionStructure => v::<IntersectionConfig>(),
            Preset::TreeCensus => v::<TreeCensusConfig>(),
            Preset::BlackThreshold => v::<BlackThresholdConfig>(),
            Preset::PoissonSmallComponents => v::<PoissonConfig>(),
            Preset::GiantLln => v::<GiantLlnConfig>(),
        }
    }
}

fn set(cfg: &mut Map<String, Value>, preset: Preset, flag: &str, key: &str, value: Value) -> Result<(), Failure> {
    if !cfg.contains_key(key) {
        return Err(Failure::Usage(format!(
            "--{flag} does not apply to preset {}",
            preset.name()
        )));
    }
    cfg.insert(key.to_string(), value);
    Ok(())
}

fn single<T: Copy + Serialize>(flag: &str, values: &[T]) -> Result<Value, Failure> {
    match values {
        [v] => Ok(serde_json::to_value(v)?),
        _ => Err(Failure::Usage(format!("--{flag} takes a single value for this preset"))),
    }
}

/// Default config, overlaid with `file` (a JSON object) and then `args`.
pub fn effective_config(preset: Preset, file: Option<Value>, args: &RunArgs) -> Result<Value, Failure> {
    let Value::Object(mut cfg) = preset.defaults() else {
        unreachable!("configs are structs")
    };
    if let Some(file) = file {
        let Value::Object(overlay) = file else {
            return Err(Failure::Data(caperc::Error::InvalidParams(
                "config file must hold a JSON object".into(),
            )));
        };
        for (k, v) in overlay {
            if !cfg.contains_key(&k) {
                return Err(Failure::Data(caperc::Error::InvalidParams(format!(
                    "unknown config key '{k}' for preset {}",
                    preset.name()
                ))));
            }
            cfg.insert(k, v);
        }
    }
    if !args.n.is_empty() {
        if cfg.contains_key("n_grid") {
            cfg.insert("n_grid".into(), serde_json::to_value(&args.n)?);
        } else {
            let v = single("n", &args.n)?;
            set(&mut cfg, preset, "n", "n", v)?;
        }
    }
    if !args.lambda.is_empty() {
        if cfg.contains_key("lambdas") {
            cfg.insert("lambdas".into(), serde_json::to_value(&args.lambda)?);
        } else {
            let v = single("lambda", &args.lambda)?;
            set(&mut cfg, preset, "lambda", "lambda", v)?;
        }
    }
    if let Some(t) = args.trials {
        set(&mut cfg, preset, "trials", "trials", t.into())?;
    }
    if let Some(s) = args.seed {
        set(&mut cfg, preset, "seed", "master_seed", s.into())?;
    }
    if let Some(q) = args.q {
        set(&mut cfg, preset, "q", "q", q.into())?;
    }
    if let Some(z) = &args.zeta {
        let rule: ZetaRule = z.parse()?;
        set(&mut cfg, preset, "zeta", "zeta_rule", serde_json::to_value(rule)?)?;
    }
    if let Some(l) = args.lambda_rest {
        set(&mut cfg, preset, "lambda-rest", "lambda_rest", l.into())?;
    }
    if let Some(a) = args.exponent {
        set(&mut cfg, preset, "exponent", "exponent", a.into())?;
    }
    if let Some(t) = args.threshold {
        set(&mut cfg, preset, "threshold", "threshold", t.into())?;
    }
    if let Some(w) = args.omega {
        set(&mut cfg, preset, "omega", "omega", w.into())?;
    }
    if let Some(c) = args.size_cap {
        set(&mut cfg, preset, "size-cap", "size_cap", c.into())?;
    }
    Ok(Value::Object(cfg))
}

fn parse<T: DeserializeOwned>(v: Value) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| {
        Failure::Data(caperc::Error::InvalidParams(format!("invalid configuration: {e}")))
    })
}

pub fn execute(preset: Preset, cfg: Value, workers: usize) -> Result<ExperimentReport, Failure> {
    Ok(match preset {
        Preset::RegimeScaling => regime_scaling(&parse(cfg)?, workers)?,
        Preset::CriticalWindow => critical_window(&parse(cfg)?, workers)?,
        Preset::IntersectionStructure => intersection_structure(&parse(cfg)?, workers)?,
        Preset::TreeCensus => tree_census(&parse(cfg)?, workers)?,
        Preset::BlackThreshold => black_threshold(&parse(cfg)?, workers)?,
        Preset::PoissonSmallComponents => poisson_small_components(&parse(cfg)?, workers)?,
        Preset::GiantLln => giant_lln(&parse(cfg)?, workers)?,
    })
}

pub fn run(preset: Preset, args: &RunArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(p) => Some(serde_json::from_reader(std::io::BufReader::new(
            std::fs::File::open(p)?,
        ))?),
        None => None,
    };
    let cfg = effective_config(preset, file, args)?;
    let workers = match args.workers {
        Some(0) => return Err(Failure::Usage("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let report = execute(preset, cfg, workers)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("caperc-out").join(preset.name()));
    report.write_to_dir(&dir)?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for v in &report.verdicts {
        println!(
            "{} {}: {} (observed {}, {})",
            if v.pass { "PASS" } else { "FAIL" },
            v.check,
            v.statement,
            v.observed,
            v.tolerance
        );
    }
    println!("wrote {}", dir.display());
    if report.passed() {
        Ok(())
    } else {
        let failed = report.verdicts.iter().filter(|v| !v.pass).count();
        Err(Failure::Verdict(format!(
            "{failed} of {} checks failed",
            report.verdicts.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flags_override_config_override_defaults() {
        let args = RunArgs {
            trials: Some(7),
            n: vec![1000, 2000],
            ..Default::default()
        };
        let file = json!({ "trials": 3, "master_seed": 42, "lambdas": [0.4, 0.4] });
        let cfg = effective_config(Preset::RegimeScaling, Some(file), &args).unwrap();
        assert_eq!(cfg["trials"], json!(7));
        assert_eq!(cfg["master_seed"], json!(42));
        assert_eq!(cfg["lambdas"], json!([0.4, 0.4]));
        assert_eq!(cfg["n_grid"], json!([1000, 2000]));
        assert_eq!(cfg["log_spread"], json!(0.25));
    }

    #[test]
    fn rejects_foreign_keys_and_flags() {
        let bad = effective_config(Preset::TreeCensus, Some(json!({ "nope": 1 })), &RunArgs::default());
        assert!(matches!(bad, Err(Failure::Data(_))));
        let args = RunArgs {
            q: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(
            effective_config(Preset::TreeCensus, None, &args),
            Err(Failure::Usage(_))
        ));
        let two = RunArgs {
            n: vec![10, 20],
            ..Default::default()
        };
        assert!(matches!(
            effective_config(Preset::TreeCensus, None, &two),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn zeta_flag_becomes_rule() {
        let args = RunArgs {
            zeta: Some("pow:0.5".into()),
            ..Default::default()
        };
        let cfg = effective_config(Preset::CriticalWindow, None, &args).unwrap();
        assert_eq!(cfg["zeta_rule"], json!({ "rule": "power", "exponent": 0.5 }));
    }
}
