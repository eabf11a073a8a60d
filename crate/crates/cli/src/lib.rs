//! Command-line front end for the `pegi-core` library: simulate models,
//! estimate mixing directions, demix, and run seeded benchmark sweeps.

pub mod args;
pub mod benchmark;
pub mod commands;
pub mod config;
pub mod error;
pub mod matrix_csv;
pub mod model_io;
pub mod report;

use std::fs;

use args::{out_dir, Cli, Command, ReportArgs, RunArgs};
use config::Overrides;
use error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Demix(a) => commands::demix(a),
        Command::Benchmark(a) => run_benchmark(a),
        Command::Report(a) => run_report(a),
    }
}

fn run_benchmark(args: &RunArgs) -> CliResult<()> {
    let cfg = commands::resolve_run(args, Overrides::default())?;
    let dir = out_dir(cfg.out.as_ref());
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let rows = benchmark::run_benchmark(&cfg)?;
    let path = dir.join(benchmark::BENCHMARK_FILE);
    fs::write(&path, benchmark::format_rows(&rows)).map_err(|e| CliError::io(&path, e))?;
    let failed = rows
        .iter()
        .filter(|r| r.row_type == benchmark::RowType::Trial && !r.is_ok())
        .count();
    println!("seed = {}", cfg.seed);
    println!("wrote {} rows to {} ({failed} trial rows not ok)", rows.len(), path.display());
    Ok(())
}

fn run_report(args: &ReportArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let rows = benchmark::parse_rows(&text, &args.input.display().to_string())?;
    let table = report::format_report(&rows, args.metric);
    print!("{table}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join("report.csv");
        fs::write(&path, &table).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
