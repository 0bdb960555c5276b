//! `qcl`: run collision-finding and distinguishing experiments from the
//! command line.
//!
//! Exit codes: 0 success, 1 a certificate failed, 2 invalid input,
//! 3 an enumeration or simulator cap was exceeded, 4 internal error.

mod config;
mod experiments;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcl_core::harness::write_csv;
use qcl_core::plot::emit_plot;

use config::{merge, read_json, Common, Outputs};
use experiments::{
    execute, AdvantageArgs, BhtArgs, Experiment, ExperimentConfig, LemmaArgs, Report, SampleArgs, SubsetArgs,
    SweepArgs,
};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Cap(String),
    Internal(String),
    CertificateFailed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::CertificateFailed(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Cap(m) | CliError::Internal(m) | CliError::CertificateFailed(m) => m,
        }
    }
}

impl From<qcl_core::Error> for CliError {
    fn from(e: qcl_core::Error) -> Self {
        if e.is_cap() {
            CliError::Cap(e.to_string())
        } else if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qcl", version, about = "Quantum collision and set-equality query laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw one function from a distribution and print it as JSON.
    Sample {
        #[command(flatten)]
        args: SampleArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Certify exactly that p(r) is a polynomial of degree < k in 1/r.
    VerifyLemma {
        #[command(flatten)]
        args: LemmaArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run the BHT collision finder on sampled functions.
    RunBht {
        #[command(flatten)]
        args: BhtArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run random-subset restriction with an element-distinctness solver.
    RunSubset {
        #[command(flatten)]
        args: SubsetArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate a distinguisher's advantage between two distributions.
    Advantage {
        #[command(flatten)]
        args: AdvantageArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Success rate over a grid of N and q, with log-log slope fits.
    Sweep {
        #[command(flatten)]
        args: SweepArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Re-emit the plot and CSV of a saved JSON report.
    Report {
        /// A report written with --report.
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the experiment described by a config file (or a saved report).
    Run {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn configure_workers(workers: Option<usize>) -> Result<(), CliError> {
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Validation("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok(())
}

fn file_outputs(file: &Option<serde_json::Value>) -> Result<Outputs, CliError> {
    match file.as_ref().and_then(|v| v.get("outputs")) {
        Some(o) => serde_json::from_value(o.clone()).map_err(|e| CliError::Validation(format!("invalid outputs: {e}"))),
        None => Ok(Outputs::default()),
    }
}

fn with_flags(mut outputs: Outputs, common: &Common) -> Outputs {
    outputs.csv = common.csv.clone().or(outputs.csv);
    outputs.report = common.report.clone().or(outputs.report);
    outputs.svg = common.svg.clone().or(outputs.svg);
    outputs
}

fn build<T, F>(args: &T, common: &Common, wrap: F) -> Result<ExperimentConfig, CliError>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
    F: FnOnce(T) -> Experiment,
{
    let file = common.config.as_deref().map(read_json).transpose()?;
    let merged = merge(file.clone(), args)?;
    let name = file.as_ref().and_then(|v| v.get("name")).and_then(|v| v.as_str()).map(String::from);
    Ok(ExperimentConfig { name, experiment: wrap(merged), outputs: with_flags(file_outputs(&file)?, common) })
}

fn load_run_config(path: &Path, common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut value = read_json(path)?;
    let from_report = value.get("config").is_some();
    if let Some(inner) = value.get("config").cloned() {
        value = inner;
    }
    let obj = value.as_object().ok_or_else(|| CliError::Validation("config must be a JSON object".into()))?;
    match obj.get("experiment").and_then(|e| e.as_str()) {
        None => return Err(CliError::Validation("config has no `experiment` field".into())),
        Some(e) if !["sample", "verify-lemma", "run-bht", "run-subset", "advantage", "sweep"].contains(&e) => {
            return Err(CliError::Validation(format!("unknown experiment `{e}`")));
        }
        _ => {}
    }
    let mut config: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
    // a saved report's output paths would overwrite the report itself
    let saved = if from_report { Outputs::default() } else { config.outputs };
    config.outputs = with_flags(saved, common);
    Ok(config)
}

fn write_outputs(report: &Report, outputs: &Outputs) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Internal(e.to_string());
    if let Some(path) = &outputs.csv {
        let file = std::fs::File::create(path).map_err(io)?;
        write_csv(&report.rows, std::io::BufWriter::new(file))?;
    }
    if let Some(path) = &outputs.report {
        let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(io)?;
    }
    if let Some(path) = &outputs.svg {
        let title = report.config.name.clone().unwrap_or_else(|| report.config.experiment.name().to_string());
        if !emit_plot(&report.rows, report.envelope_constant, &title, path)? {
            eprintln!("warning: nothing to plot, {} not written", path.display());
        }
    }
    Ok(())
}

fn print_human(report: &Report) {
    if let Experiment::Sample(_) = report.config.experiment {
        let sample = &report.summary["sample"];
        println!("{}", serde_json::to_string_pretty(sample).unwrap_or_default());
        return;
    }
    println!("experiment: {}", report.config.experiment.name());
    for row in &report.rows {
        println!(
            "N={} M={} q={} trials={} rate={:.6} ±{:.6} [{}] seed={}",
            row.n, row.m, row.q, row.trials, row.success_rate, row.ci95, row.distinguisher, row.seed
        );
    }
    if let serde_json::Value::Object(map) = &report.summary {
        for (k, v) in map {
            if k != "estimate" {
                println!("{k}: {v}");
            }
        }
    }
    println!("queries: {}  wall clock: {:.2}s", report.accounting.total_queries, report.accounting.wall_clock_seconds);
}

fn run_config(mut config: ExperimentConfig, common: &Common) -> Result<(), CliError> {
    configure_workers(common.workers)?;
    config.experiment.resolve()?;
    let report = execute(&config)?;
    write_outputs(&report, &config.outputs)?;
    if common.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?);
    } else {
        print_human(&report);
    }
    let failed = report.certificates.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::CertificateFailed(format!("{failed} certificates failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample { args, common } => run_config(build(&args, &common, Experiment::Sample)?, &common),
        Command::VerifyLemma { args, common } => run_config(build(&args, &common, Experiment::VerifyLemma)?, &common),
        Command::RunBht { args, common } => run_config(build(&args, &common, Experiment::RunBht)?, &common),
        Command::RunSubset { args, common } => run_config(build(&args, &common, Experiment::RunSubset)?, &common),
        Command::Advantage { args, common } => run_config(build(&args, &common, Experiment::Advantage)?, &common),
        Command::Sweep { args, common } => run_config(build(&args, &common, Experiment::Sweep)?, &common),
        Command::Run { path, common } => {
            let config = load_run_config(&path, &common)?;
            run_config(config, &common)
        }
        Command::Report { path, common } => {
            let report: Report = serde_json::from_value(read_json(&path)?)
                .map_err(|e| CliError::Validation(format!("{} is not a report: {e}", path.display())))?;
            if report.rows.is_empty() {
                eprintln!("warning: report has no rows");
            }
            write_outputs(&report, &with_flags(Outputs::default(), &common))?;
            if common.json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?);
            } else {
                print_human(&report);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
