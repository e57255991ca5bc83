mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::*;
use output::Metadata;

/// Discrete adiabatic walks: gap tables, spectra, Volterra diagnostics and search schedules.
#[derive(Parser, Debug)]
#[command(name = "adiawalk", version)]
struct Cli {
    /// Experiment to run; overrides the config file's `experiment`.
    experiment: Option<String>,
    /// JSON config with `experiment`, `parameters`, `seed`, `outputPath`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 lets rayon decide).
    #[arg(long, env = "ADIAWALK_THREADS")]
    threads: Option<usize>,
    /// RNG seed for random instances; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Parameter override, `key=value` with a JSON value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// List experiments and exit.
    #[arg(long)]
    list: bool,
}

enum Failure {
    Config(String),
    Core(adiawalk::Error),
    Io(std::io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Core(e) if e.is_numerical() => 3,
            Failure::Core(_) => 2,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<adiawalk::Error> for Failure {
    fn from(e: adiawalk::Error) -> Self {
        Failure::Core(e)
    }
}

fn list_text() -> String {
    let w = EXPERIMENTS.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    EXPERIMENTS.iter().map(|(n, d)| format!("{n:<w$}  {d}\n")).collect()
}

fn parse_params<P: DeserializeOwned + Serialize>(v: &serde_json::Value) -> Result<(P, serde_json::Value), Failure> {
    let p: P = serde_json::from_value(v.clone()).map_err(|e| Failure::Config(format!("parameters: {e}")))?;
    let resolved = serde_json::to_value(&p).expect("parameters serialize");
    Ok((p, resolved))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.list {
        print!("{}", list_text());
        return Ok(());
    }
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig { experiment: String::new(), parameters: serde_json::Value::Null, seed: None, output_path: None },
    };
    if let Some(e) = cli.experiment {
        cfg.experiment = e;
    }
    if cfg.experiment.is_empty() {
        return Err(Failure::Config(format!("no experiment given; choose one of:\n{}", list_text())));
    }
    if !EXPERIMENTS.iter().any(|(n, _)| *n == cfg.experiment) {
        return Err(Failure::Config(format!("unknown experiment '{}'; choose one of:\n{}", cfg.experiment, list_text())));
    }
    if cfg.parameters.is_null() {
        cfg.parameters = serde_json::Value::Object(Default::default());
    }
    let obj = cfg.parameters.as_object_mut().ok_or_else(|| Failure::Config("parameters must be a JSON object".into()))?;
    for o in &cli.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Failure::Config(format!("override '{o}' is not KEY=VALUE")))?;
        // Bare words are taken as strings.
        let value = serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.to_string()));
        obj.insert(k.to_string(), value);
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let out = cli.out.or(cfg.output_path);

    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }

    let (outcome, resolved) = match cfg.experiment.as_str() {
        "gap-table" => {
            let (p, r) = parse_params::<GapTableParams>(&cfg.parameters)?;
            (experiments::gap_table(&p)?, r)
        }
        "spectrum-scan" => {
            let (p, r) = parse_params::<SpectrumParams>(&cfg.parameters)?;
            (experiments::spectrum_scan(&p)?, r)
        }
        "fidelity-sweep" => {
            let (p, r) = parse_params::<FidelityParams>(&cfg.parameters)?;
            (experiments::fidelity(&p)?, r)
        }
        "volterra" => {
            let (p, r) = parse_params::<VolterraParams>(&cfg.parameters)?;
            (experiments::volterra(&p)?, r)
        }
        "grover-scaling" => {
            let (p, r) = parse_params::<GroverScalingParams>(&cfg.parameters)?;
            (experiments::grover_scaling(&p)?, r)
        }
        "qaoa-export" => {
            let (p, r) = parse_params::<QaoaParams>(&cfg.parameters)?;
            (experiments::qaoa_export(&p)?, r)
        }
        "step-size-report" => {
            let (p, r) = parse_params::<StepSizeParams>(&cfg.parameters)?;
            (experiments::step_size_report(&p, seed)?, r)
        }
        _ => unreachable!("experiment name validated above"),
    };
    let config_json = serde_json::json!({ "experiment": cfg.experiment, "parameters": resolved, "seed": seed }).to_string();
    let meta = Metadata { experiment: cfg.experiment.clone(), config_json, seed };
    output::emit(&outcome.table, outcome.summary.as_ref(), &meta, out.as_deref()).map_err(Failure::Io)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adiawalk: {e}");
            ExitCode::from(e.code())
        }
    }
}
