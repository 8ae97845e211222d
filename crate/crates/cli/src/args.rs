use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use pseudofsr::{Family, FitOptions, FsrConfig, ScreeningMethod};

#[derive(Debug, Parser)]
#[command(name = "pseudofsr", version, about = "False selection rate estimation along Lasso paths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the FSR along the path for a CSV dataset and write a path document.
    Fit(FitArgs),
    /// Run a scenario grid and write one summary row per scenario and method.
    Simulate(SimulateArgs),
    /// Serve a path document as a read-only JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Screen {
    /// Cross-validated Lasso.
    Cv,
    /// Row-permutation screening.
    Pseudo,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV with a header row; every column other than the response and status is a predictor.
    pub data: PathBuf,
    #[arg(long, default_value = "linear")]
    pub family: Family,
    /// Response column (survival time for Cox).
    #[arg(long)]
    pub response: String,
    /// Event indicator column for Cox: 1 failure, 0 censored.
    #[arg(long)]
    pub status: Option<String>,
    #[arg(long, value_enum, default_value_t = Screen::Cv)]
    pub screen: Screen,
    /// Folds for CV screening.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Pseudo-variable replicates.
    #[arg(long = "B", default_value_t = 100)]
    pub b: usize,
    /// Target FSR level; repeat for several.
    #[arg(long = "alpha", action = ArgAction::Append, default_values_t = [0.2])]
    pub alpha: Vec<f64>,
    #[arg(long)]
    pub no_permutation: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub lambda_count: usize,
    /// Smallest lambda as a fraction of lambda_max [default: 1e-3 if n > p, else 1e-2].
    #[arg(long)]
    pub lambda_ratio: Option<f64>,
    #[arg(long)]
    pub no_intercept: bool,
    /// Output path document (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

impl FitArgs {
    pub fn config(&self) -> FsrConfig {
        let screening = match self.screen {
            Screen::Cv => ScreeningMethod::Cv { folds: self.folds },
            Screen::Pseudo => ScreeningMethod::Pseudo { alpha_n: 0.2, b: 20 },
        };
        FsrConfig {
            b_replicates: self.b,
            use_permutation: !self.no_permutation,
            alpha_targets: self.alpha.clone(),
            screening,
            lambdas: None,
            lambda_count: self.lambda_count,
            lambda_ratio: self.lambda_ratio,
            seed: self.seed,
            fit: FitOptions { intercept: !self.no_intercept, ..FitOptions::default() },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML): a [base] scenario, optional [vary] lists, and methods.
    pub scenario: PathBuf,
    /// Output file; `.json` writes full results, anything else a CSV summary. Defaults to CSV on stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Path document written by `fit`.
    pub document: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory holding the explorer bundle; `index.html` is served at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}
