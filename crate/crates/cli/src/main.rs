//! `sigsub`: signal-subgraph graph classification from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sigsub_core::{Error, ErrorClass};

#[derive(Debug, Parser)]
#[command(name = "sigsub", version, about = "Signal-subgraph estimation and graph classification")]
struct Cli {
    /// Worker threads for trials, folds and permutations.
    #[arg(long, global = true, env = "SIGSUB_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Edge test: fisher, chi2 or mle.
    #[arg(long, default_value = "fisher")]
    pub stat: String,
    /// Smoothing basis: total or per_class.
    #[arg(long, default_value = "total")]
    pub eta: String,
    /// Tie order among equal scores: lexicographic or shuffled:SEED.
    #[arg(long, default_value = "lexicographic")]
    pub ties: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample datasets from the homogeneous model described by a JSON spec.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate a signal-subgraph and fit the plug-in classifier.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        s: usize,
        /// Signal-vertex budget; omit for the incoherent estimator.
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also write the estimated subgraph CSV (plus a .json sidecar).
        #[arg(long)]
        subgraph_out: Option<PathBuf>,
        /// Also write the significance matrix CSV.
        #[arg(long)]
        significance_out: Option<PathBuf>,
    },
    /// Classify one graph with a fitted model.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Cross-validated error at one budget.
    Xval {
        #[arg(long)]
        data: PathBuf,
        /// loo, kfold:C[:SEED] or heldout:MANIFEST.
        #[arg(long, default_value = "loo")]
        scheme: String,
        /// Omit for naïve Bayes on every edge.
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid search over (s, m) with cross-validation.
    Search {
        #[arg(long)]
        data: PathBuf,
        /// Values of s: A:B, A:B:STEP, comma lists, or a mix.
        #[arg(long)]
        s_grid: String,
        /// Values of m; V means incoherent. Defaults to V only.
        #[arg(long)]
        m_grid: Option<String>,
        #[arg(long, default_value = "loo")]
        scheme: String,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
        /// Error surface CSV; defaults to the report path with a .csv extension.
        #[arg(long)]
        surface_out: Option<PathBuf>,
        /// Model refit on all data at the chosen budget.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Label-permutation test of the naïve Bayes classifier.
    Permtest {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1000)]
        nmc: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "kfold:5")]
        scheme: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// McNemar test of two classifiers' predictions.
    Compare {
        #[arg(long)]
        preds_a: PathBuf,
        #[arg(long)]
        preds_b: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Vertex × significance-level counts of incident significant edges.
    Coherogram {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "fisher")]
        stat: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate a figure's data at a fixed budget.
    Reproduce {
        #[arg(long)]
        figure: u8,
        #[arg(long, default_value = "desk")]
        budget: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Usage => 2,
        ErrorClass::Data => 3,
        ErrorClass::Infeasible => 4,
    }
}

fn class_name(class: ErrorClass) -> &'static str {
    match class {
        ErrorClass::Usage => "usage",
        ErrorClass::Data => "data",
        ErrorClass::Infeasible => "infeasible",
    }
}

fn report(class: ErrorClass, message: &str) -> ExitCode {
    let line = serde_json::json!({ "error": class_name(class), "message": message });
    eprintln!("{line}");
    ExitCode::from(exit_code(class))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let message: Vec<&str> = rendered
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            return report(ErrorClass::Usage, message.join(" ").trim_start_matches("error: "));
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return report(ErrorClass::Usage, "--jobs must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            return report(ErrorClass::Usage, &e.to_string());
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e.class(), &one_line(&e)),
    }
}

fn one_line(e: &Error) -> String {
    let mut message = e.to_string();
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        let text = s.to_string();
        if !message.contains(&text) {
            message.push_str(": ");
            message.push_str(&text);
        }
        source = s.source();
    }
    message.replace('\n', " ")
}
