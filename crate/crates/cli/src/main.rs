//! `caperc` command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 failed verdict (experiment or self-test).

mod presets;
mod theory_cmd;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use caperc::census::{ca_census, census, write_census_csv};
use caperc::connectivity::{ca_partition, components, oracle_self_test, write_partition_csv};
use caperc::model::{read_edgelist, sample_model, write_edgelist, ColorSet, ModelParams};
use clap::{Args, Parser, Subcommand};

use presets::{Preset, RunArgs};

#[derive(Parser)]
#[command(name = "caperc", version, about = "Color-avoiding percolation on layered random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a k-layer random graph and write it as an edge list.
    Sample(SampleArgs),
    /// Read an edge list and write its color-avoiding partition and census.
    Ca(CaArgs),
    /// Evaluate a closed-form predictor and print it as JSON.
    Theory {
        #[command(subcommand)]
        predictor: theory_cmd::Predictor,
    },
    /// Run an experiment preset and write results, verdicts and a manifest.
    Run {
        #[arg(value_enum)]
        preset: Preset,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Check the fast partition against the brute-force oracle.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Number of vertices (`1e6` notation accepted).
    #[arg(long, value_parser = parse_count)]
    n: usize,
    /// Number of colors; defaults to the number of intensities given.
    #[arg(long)]
    k: Option<usize>,
    /// Intensities, comma separated; a single value is repeated k times.
    #[arg(long, value_delimiter = ',', required = true)]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CaArgs {
    /// Edge list to read (default: stdin).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Partition CSV destination (default: stdout).
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Census CSV destination (default: stderr).
    #[arg(long)]
    census: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    instances: u64,
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(caperc::Error),
    Verdict(String),
}

impl From<caperc::Error> for Failure {
    fn from(e: caperc::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.into())
    }
}

/// Parses a non-negative integer, also in float notation such as `1e6`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x >= 0.0 && x.fract() == 0.0 && x <= 9007199254740992.0 {
        Ok(x as usize)
    } else {
        Err(format!("'{s}' is not a non-negative integer"))
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sample(a: &SampleArgs) -> Result<(), Failure> {
    let lambdas = match (a.k, a.lambda.as_slice()) {
        (Some(k), [l]) => vec![*l; k],
        (Some(k), ls) if ls.len() != k => {
            return Err(Failure::Usage(format!(
                "--k {k} but {} intensities given",
                ls.len()
            )))
        }
        (_, ls) => ls.to_vec(),
    };
    let params = ModelParams::new(a.n, lambdas)?;
    let g = sample_model(&params, a.seed)?;
    let mut out = output(a.out.as_ref())?;
    write_edgelist(&g, &mut out)?;
    out.flush()?;
    Ok(())
}

fn ca(a: &CaArgs) -> Result<(), Failure> {
    let g = match &a.input {
        Some(p) => read_edgelist(BufReader::new(File::open(p)?))?,
        None => read_edgelist(io::stdin().lock())?,
    };
    let p = ca_partition(&g)?;
    let union = g.union_view(ColorSet::full(g.k()));
    let layer = census(&components(g.n(), union.iter().copied())?, &union)?;
    let small = ca_census(&p, g.k());

    let mut out = output(a.partition.as_ref())?;
    write_partition_csv(&p, &mut out)?;
    out.flush()?;
    match &a.census {
        Some(path) => write_census_csv(Some(&layer), Some(&small), BufWriter::new(File::create(path)?))?,
        None => write_census_csv(Some(&layer), Some(&small), io::stderr().lock())?,
    }
    Ok(())
}

fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let r = oracle_self_test(a.instances, a.max_n, a.seed)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    if r.mismatches > 0 {
        return Err(Failure::Verdict(format!(
            "{} of {} instances disagree with the oracle",
            r.mismatches, r.instances
        )));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sample(a) => sample(&a),
        Command::Ca(a) => ca(&a),
        Command::Theory { predictor } => {
            let p = theory_cmd::evaluate(&predictor)?;
            println!("{}", serde_json::to_string_pretty(&p)?);
            Ok(())
        }
        Command::Run { preset, args } => presets::run(preset, &args),
        Command::Verify(a) => verify(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Verdict(msg)) => {
            eprintln!("verdict failure: {msg}");
            ExitCode::from(3)
        }
    }
}
