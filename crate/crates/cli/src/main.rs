//! `tmvkscr` command-line tool.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 1 runtime failure.
//! `TMVKSCR_THREADS` sets the worker thread count.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tmvkscr::data::SynthKind;

use commands::{FitOverrides, GridOverrides, PredictArgs};

#[derive(Parser)]
#[command(
    name = "tmvkscr",
    version,
    about = "Tensor-based multi-view kernel spectral clustering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic benchmark as CSV files.
    Generate {
        #[arg(long)]
        dataset: SynthKind,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model from a run configuration.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// Train on this many sampled points and label the rest out of sample.
        #[arg(long)]
        fixed_size: Option<usize>,
        /// Seed for the fixed-size subset.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Write the training labels here.
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
    /// Label new samples with a fitted model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        views: Vec<PathBuf>,
        /// Ground-truth labels; ARI/NMI are reported when given.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        header: bool,
        #[arg(long)]
        out: PathBuf,
        /// Write the N x (k-1) mean score matrix.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Write per-view assignments.
        #[arg(long)]
        per_view: Option<PathBuf>,
    },
    /// Compare two label files.
    Evaluate {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        header: bool,
    },
    /// Grid search scored by ARI against the configured labels.
    Tune(TuneArgs),
    /// Export explained variance and latent variables of a model.
    Report {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Ground-truth labels for the training samples.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    config: PathBuf,
    /// Grid document (JSON); defaults to the full ranges.
    #[arg(long, conflicts_with = "small")]
    grid: Option<PathBuf>,
    /// Five sigma2 values by three rho values.
    #[arg(long)]
    small: bool,
    #[arg(long, value_delimiter = ',')]
    sigma2: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    degree: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    /// Ranked results and best configuration (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Best configuration as a run configuration.
    #[arg(long)]
    best_config: Option<PathBuf>,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("TMVKSCR_THREADS") {
        let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            tmvkscr::Error::Config(format!(
                "TMVKSCR_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    match cli.command {
        Command::Generate {
            dataset,
            n,
            seed,
            out,
        } => commands::generate(dataset, n, seed, &out),
        Command::Fit {
            config,
            fixed_size,
            seed,
            model,
            summary,
            labels_out,
        } => commands::fit(
            &config,
            FitOverrides {
                fixed_size,
                seed,
                model,
                summary,
                labels_out,
            },
        ),
        Command::Predict {
            model,
            views,
            labels,
            header,
            out,
            scores,
            per_view,
        } => commands::predict(PredictArgs {
            model: &model,
            views: &views,
            labels: labels.as_deref(),
            header,
            out: &out,
            scores: scores.as_deref(),
            per_view: per_view.as_deref(),
        }),
        Command::Evaluate {
            truth,
            pred,
            header,
        } => commands::evaluate(&truth, &pred, header),
        Command::Tune(t) => commands::tune_cmd(
            &t.config,
            GridOverrides {
                grid: t.grid,
                small: t.small,
                sigma2: t.sigma2,
                degree: t.degree,
                t: t.t,
                rho: t.rho,
                kappa: t.kappa,
            },
            t.out.as_deref(),
            t.best_config.as_deref(),
        ),
        Command::Report {
            model,
            out_dir,
            labels,
            svg,
        } => commands::report(&model, &out_dir, labels.as_deref(), svg),
    }
}

fn is_config(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<tmvkscr::Error>()
            .is_some_and(|e| e.is_config())
    })
}

fn broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<std::io::Error>()
            .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_config(&err) { 2 } else { 1 })
        }
    }
}
