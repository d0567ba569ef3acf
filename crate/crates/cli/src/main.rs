use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use offload_core::estimation::{estimate_offload, train_estimator, Estimator, EstimatorSpec, Method};
use offload_core::evaluation::{run_experiment, EvaluationReport, MatrixConfig};
use offload_core::persistence::{read_dataset, read_text, write_atomic, write_dataset, GenerationConfig};
use offload_core::regression::{ModelConfig, ModelKind};
use offload_core::simulator::generate_dataset;
use offload_core::{Direction, MetricVector, Technique};

/// Simulate container offloads, train down-time estimators and evaluate them.
#[derive(Debug, Parser)]
#[command(name = "offload", version)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores). Output does
    /// not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the sweep in a generation config and write the dataset CSV.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one estimator on a dataset slice and write it as JSON.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        technique: Technique,
        #[arg(long)]
        direction: Direction,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Hyperparameter overrides (JSON); defaults otherwise.
        #[arg(long)]
        model_config: Option<PathBuf>,
    },
    /// Print the estimated down time in seconds for one metrics vector.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// JSON object with keys p1..p25.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run an experiment matrix and write the report.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the report as JSON, with per-fold detail.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Convert a report CSV to another format on standard output.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Markdown,
}

enum Failure {
    Usage(String),
    Data(offload_core::Error),
}

impl From<offload_core::Error> for Failure {
    fn from(e: offload_core::Error) -> Self {
        Failure::Data(e)
    }
}

fn read_json<T>(path: &Path, parse: impl FnOnce(&str) -> offload_core::Result<T>) -> Result<T, Failure> {
    let text = read_text(path)?;
    parse(&text).map_err(|e| Failure::Data(with_path(path, e)))
}

fn with_path(path: &Path, e: offload_core::Error) -> offload_core::Error {
    offload_core::Error::InvalidConfig(format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Generate { config, seed, out } => {
            let config = read_json(&config, GenerationConfig::from_json)?;
            let dataset = generate_dataset(&config.sweep, &config.generative, seed)?;
            write_dataset(&dataset, &out)?;
            eprintln!("wrote {} records to {}", dataset.len(), out.display());
        }
        Command::Train {
            dataset,
            technique,
            direction,
            method,
            model,
            seed,
            out,
            model_config,
        } => {
            let mut spec = EstimatorSpec::new(method, model, technique, direction);
            if let Some(path) = model_config {
                spec.model_config = read_json(&path, |t| Ok(serde_json::from_str::<ModelConfig>(t)?))?;
            }
            let dataset = read_dataset(&dataset)?;
            let estimator = train_estimator(&dataset, &spec, seed)?;
            write_atomic(&out, estimator.to_json()?.as_bytes())?;
            eprintln!("wrote {estimator} to {}", out.display());
        }
        Command::Predict { model, input } => {
            let estimator = read_json(&model, Estimator::from_json)?;
            let metrics: MetricVector = read_json(&input, |t| Ok(serde_json::from_str(t)?))?;
            if let Err(violations) = metrics.validate() {
                let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
                return Err(Failure::Data(offload_core::Error::InvalidConfig(format!(
                    "{}: {}",
                    input.display(),
                    list.join("; ")
                ))));
            }
            println!("{:.6}", estimate_offload(&estimator, &metrics)?);
        }
        Command::Evaluate {
            dataset,
            matrix,
            seed,
            out,
            json,
        } => {
            let matrix = read_json(&matrix, MatrixConfig::from_json)?;
            let dataset = read_dataset(&dataset)?;
            let report = run_experiment(&dataset, &matrix, seed)?;
            write_atomic(&out, report.to_csv().as_bytes())?;
            if let Some(path) = json {
                write_atomic(&path, report.to_json()?.as_bytes())?;
            }
            let skipped = report.cells.iter().filter(|c| c.skipped.is_some()).count();
            eprintln!("wrote {} cells ({skipped} skipped) to {}", report.cells.len(), out.display());
        }
        Command::Report { input, format } => {
            let report = EvaluationReport::from_csv(&read_text(&input)?)?;
            match format {
                Format::Csv => print!("{}", report.to_csv()),
                Format::Json => print!("{}", report.to_json()?),
                Format::Markdown => print!("{}", report.to_markdown()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
