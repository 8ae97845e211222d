use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use pseudofsr::simgen::write_summary_csv;
use pseudofsr::{estimate_fsr, read_dataset_file, run_scenario, FsrError, PathDocument, ResponseSpec, ScenarioGrid, SimResult};
use thiserror::Error;

use crate::args::{Cli, Command, FitArgs, ServeArgs, SimulateArgs};
use crate::server::{self, Served};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Fsr(#[from] FsrError),

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("server: {0}")]
    Server(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Fsr(e) => match e {
                FsrError::EmptyComplement
                | FsrError::ZeroVarianceResponse
                | FsrError::NoConvergence { .. }
                | FsrError::AllCensored => 3,
                FsrError::Io(_) => 1,
                _ => 2,
            },
            CliError::Io { .. } | CliError::Server(_) => 1,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(args) => {
            let doc = fit(&args)?;
            print_selection(&doc);
            Ok(())
        }
        Command::Simulate(args) => simulate(&args).map(|_| ()),
        Command::Serve(args) => serve(&args),
    }
}

/// Read the CSV, estimate, and write the path document to `--out`.
pub fn fit(args: &FitArgs) -> Result<PathDocument, CliError> {
    let spec = ResponseSpec { family: args.family, response: args.response.clone(), status: args.status.clone() };
    let data = read_dataset_file(&args.data, &spec).map_err(|e| match e {
        FsrError::Io(source) => io_error(&args.data)(source),
        other => other.into(),
    })?;
    let cfg = args.config();
    let curve = estimate_fsr(data.x.view(), &data.y, &cfg)?;
    let doc = PathDocument::from_curve(&curve, &data.x, &cfg);
    std::fs::write(&args.out, doc.to_json()? + "\n").map_err(io_error(&args.out))?;
    Ok(doc)
}

fn print_selection(doc: &PathDocument) {
    let meta = &doc.metadata;
    println!("{} lasso, n = {}, p = {}, B = {}, screened: [{}]", meta.family, meta.n, meta.p, meta.b_replicates, meta.screened_set.join(", "));
    if meta.degraded {
        println!("screening selected nothing; estimates use permuted copies of every column");
    }
    for s in &doc.selected {
        match (s.lambda_index, s.lambda) {
            (Some(i), Some(lambda)) => {
                let names: Vec<&str> = s.coefficients.keys().map(String::as_str).collect();
                println!("alpha = {}: lambda[{i}] = {lambda:.6}, selected [{}]", s.alpha, names.join(", "));
            }
            _ => println!("alpha = {}: no lambda on the grid reaches this level", s.alpha),
        }
    }
}

/// Run every scenario × method in the file and write the results.
pub fn simulate(args: &SimulateArgs) -> Result<Vec<SimResult>, CliError> {
    let text = std::fs::read_to_string(&args.scenario).map_err(io_error(&args.scenario))?;
    let grid = ScenarioGrid::from_toml(&text)?;
    let mut results = Vec::new();
    for sc in grid.scenarios() {
        for &method in &grid.methods {
            let r = run_scenario(&sc, method)?;
            eprintln!(
                "{} {method} n={} p={} s={}: fsr {:.3} ({:.3}), tsr {:.3}, failures {}",
                sc.family, sc.n, sc.p, sc.sparsity, r.mean_fsr, r.se_fsr, r.mean_tsr, r.failures
            );
            results.push(r);
        }
    }
    match &args.out {
        Some(path) if path.extension().is_some_and(|e| e == "json") => {
            let json = serde_json::to_string_pretty(&results).map_err(FsrError::from)?;
            std::fs::write(path, json + "\n").map_err(io_error(path))?;
        }
        Some(path) => {
            let file = File::create(path).map_err(io_error(path))?;
            write_summary_csv(&results, BufWriter::new(file))?;
        }
        None => {
            write_summary_csv(&results, io::stdout().lock())?;
            io::stdout().flush().map_err(io_error(Path::new("stdout")))?;
        }
    }
    Ok(results)
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let raw = std::fs::read(&args.document).map_err(io_error(&args.document))?;
    let served = Arc::new(Served::new(raw, args.static_dir.clone())?);
    let addr = format!("{}:{}", args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::Server)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(CliError::Server)?;
        eprintln!("serving {} on http://{addr}", args.document.display());
        axum::serve(listener, server::router(served)).await.map_err(CliError::Server)
    })
}
