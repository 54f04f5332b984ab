//! `aucpower`: sample size and power for AUROC validation studies.
//!
//! Exit codes: 0 on success, 2 for bad flags, unreadable or invalid input and
//! calculations the inputs make impossible, 1 for anything else.

mod render;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use aucpower::binormal::{BinormalSpec, DEFAULT_CORRELATION, DEFAULT_VARIANCE};
use aucpower::ingest::{parse_pilot_file, PilotFileSpec};
use aucpower::report::{self, query_from_parts, Query};
use aucpower::rng::fresh_seed;
use aucpower::{McConfig, SearchOptions, SingleSizeRequest};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "aucpower",
    version,
    about = "Sample size and power for AUROC external validation"
)]
struct Cli {
    /// Print the full result document as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true, env = "AUCPOWER_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample size to estimate one model's AUROC to a given CI width.
    Single(SingleArgs),
    /// Power to detect an AUROC difference by resampling a pilot test set.
    Pilot(PilotArgs),
    /// Power to detect an AUROC difference under a binormal model.
    Binormal(BinormalArgs),
}

#[derive(Args, Debug)]
struct SingleArgs {
    #[arg(long)]
    auroc: f64,
    #[arg(long)]
    prevalence: f64,
    #[arg(long)]
    ci_width: f64,
}

#[derive(Args, Debug)]
struct QueryArgs {
    /// Estimate power at this total sample size.
    #[arg(long, group = "query")]
    n: Option<usize>,
    /// Estimate a power curve over these strictly increasing sizes.
    #[arg(long, group = "query", value_delimiter = ',', num_args = 1..)]
    n_grid: Option<Vec<usize>>,
    /// Search for the smallest sample size reaching this power.
    #[arg(long, group = "query")]
    target_power: Option<f64>,

    #[arg(long, default_value_t = SearchOptions::default().n_min)]
    n_min: usize,
    #[arg(long, default_value_t = SearchOptions::default().n_max)]
    n_max: usize,
    /// Refinement step of the search (default: a twentieth of the bracket).
    #[arg(long)]
    refine_step: Option<usize>,

    /// Seed for the simulation (default: fresh, printed with the result).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = McConfig::default().iterations)]
    iters: usize,
    #[arg(long, default_value_t = McConfig::default().alpha)]
    alpha: f64,
    #[arg(long, default_value_t = McConfig::default().max_redraws_per_iteration)]
    max_redraws: usize,

    /// Also write the power table to this file as `n,power,mc_se` CSV.
    #[arg(long)]
    export_csv: Option<PathBuf>,
}

impl QueryArgs {
    fn config(&self) -> McConfig {
        McConfig {
            alpha: self.alpha,
            iterations: self.iters,
            seed: self.seed.unwrap_or_else(fresh_seed),
            max_redraws_per_iteration: self.max_redraws,
        }
    }

    fn query(&self) -> Result<Query, Failure> {
        let search = SearchOptions {
            n_min: self.n_min,
            n_max: self.n_max,
            refine_step: self.refine_step,
            ..SearchOptions::default()
        };
        query_from_parts(self.n, self.n_grid.clone(), self.target_power, search)
            .map_err(Failure::Input)
    }
}

#[derive(Args, Debug)]
struct PilotArgs {
    /// Pilot CSV with a label column and both models' predictions.
    #[arg(long)]
    file: PathBuf,
    /// Simulate studies at this prevalence by reweighting the pilot rows.
    #[arg(long)]
    prevalence: Option<f64>,

    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long, default_value = "pred_a")]
    score_a_column: String,
    #[arg(long, default_value = "pred_b")]
    score_b_column: String,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Skip malformed rows instead of failing.
    #[arg(long)]
    lenient: bool,

    #[command(flatten)]
    query: QueryArgs,
}

#[derive(Args, Debug)]
struct BinormalArgs {
    #[arg(long)]
    mu_case_a: f64,
    #[arg(long)]
    mu_case_b: f64,
    #[arg(long)]
    mu_ctrl_a: f64,
    #[arg(long)]
    mu_ctrl_b: f64,
    #[arg(long, default_value_t = DEFAULT_VARIANCE)]
    v_case_a: f64,
    #[arg(long, default_value_t = DEFAULT_VARIANCE)]
    v_case_b: f64,
    #[arg(long, default_value_t = DEFAULT_VARIANCE)]
    v_ctrl_a: f64,
    #[arg(long, default_value_t = DEFAULT_VARIANCE)]
    v_ctrl_b: f64,
    #[arg(long, default_value_t = DEFAULT_CORRELATION)]
    r_case: f64,
    #[arg(long, default_value_t = DEFAULT_CORRELATION)]
    r_ctrl: f64,
    #[arg(long)]
    prevalence: f64,

    #[command(flatten)]
    query: QueryArgs,
}

impl BinormalArgs {
    fn spec(&self) -> BinormalSpec {
        BinormalSpec {
            mu_case_a: self.mu_case_a,
            mu_case_b: self.mu_case_b,
            mu_ctrl_a: self.mu_ctrl_a,
            mu_ctrl_b: self.mu_ctrl_b,
            v_case_a: self.v_case_a,
            v_case_b: self.v_case_b,
            v_ctrl_a: self.v_ctrl_a,
            v_ctrl_b: self.v_ctrl_b,
            r_case: self.r_case,
            r_ctrl: self.r_ctrl,
            phi: self.prevalence,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Internal(String),
}

impl From<aucpower::Error> for Failure {
    fn from(e: aucpower::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn write_export(path: &Option<PathBuf>, outcome: &report::PowerOutcome) -> Result<(), Failure> {
    if let Some(path) = path {
        fs::write(path, report::curve_csv(&outcome.points()))
            .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String, Failure> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Single(a) => {
            let doc = report::run_single(&SingleSizeRequest {
                auroc: a.auroc,
                prevalence: a.prevalence,
                ci_width: a.ci_width,
            })?;
            Ok(if cli.json {
                doc.to_json()
            } else {
                render::single(&doc)
            })
        }
        Command::Pilot(a) => {
            if !a.delimiter.is_ascii() {
                return Err(Failure::Input(
                    "delimiter must be a single ASCII character".into(),
                ));
            }
            let fspec = PilotFileSpec {
                label_column: a.label_column,
                score_a_column: a.score_a_column,
                score_b_column: a.score_b_column,
                delimiter: a.delimiter as u8,
                lenient: a.lenient,
            };
            let (pilot, summary) = parse_pilot_file(&a.file, &fspec)
                .map_err(|e| Failure::Input(format!("{}: {e}", a.file.display())))?;
            let query = a.query.query()?;
            let doc = report::run_pilot(&pilot, summary, a.prevalence, a.query.config(), query)?;
            write_export(&a.query.export_csv, &doc.results.outcome)?;
            Ok(if cli.json {
                doc.to_json()
            } else {
                render::pilot(&doc)
            })
        }
        Command::Binormal(a) => {
            let query = a.query.query()?;
            let doc = report::run_binormal(&a.spec(), a.query.config(), query)?;
            write_export(&a.query.export_csv, &doc.results.outcome)?;
            Ok(if cli.json {
                doc.to_json()
            } else {
                render::binormal(&doc)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
