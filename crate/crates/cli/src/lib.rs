//! Command-line front end for the `layerguard` solvers.
//!
//! Exit codes are the same for every command: `0` when the run succeeded
//! (an optimal allocation for single-budget commands), `2` when the budget
//! admits no allocation, `1` for any error.

pub mod instance_file;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use layerguard::montecarlo::{estimate_detection_with, SimulationConfig};
use layerguard::{run_sweep, solve, Engine, SolverOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Brute,
    Dp,
    Bnb,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Brute => Engine::BruteForce,
            EngineArg::Dp => Engine::Dp,
            EngineArg::Bnb => Engine::Bnb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "layerguard", version, about = "Budgeted monitoring-depth allocation for layered intrusion detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance at its single budget.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "bnb")]
        engine: EngineArg,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Solve across a list of budgets and write the assignment and
    /// contribution CSV tables.
    Sweep {
        input: PathBuf,
        /// Comma-separated budgets, overriding those in the file.
        #[arg(long)]
        budgets: Option<String>,
        #[arg(long, value_enum, default_value = "bnb")]
        engine: EngineArg,
        /// Directory receiving assignments.csv and contributions.csv.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
    /// Export the integer program in LP format.
    ExportLp {
        input: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve, then estimate the detected weight of the optimum by simulation.
    Simulate {
        input: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of independent random streams the trials are split over.
        #[arg(long, default_value_t = 1)]
        partitions: usize,
        #[arg(long, value_enum, default_value = "bnb")]
        engine: EngineArg,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

/// Runs a command, writing results to `out` and diagnostics to `err`, and
/// returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Solve { input, engine, format } => cmd_solve(&input, engine.into(), format, out),
        Command::Sweep { input, budgets, engine, output } => {
            let budgets = budgets.as_deref().map(parse_budget_list).transpose()?;
            cmd_sweep(&input, budgets, engine.into(), &output, out)
        }
        Command::ExportLp { input, output } => cmd_export_lp(&input, output.as_deref(), out),
        Command::Simulate { input, trials, seed, partitions, engine, format } => {
            cmd_simulate(&input, trials, seed, partitions, engine.into(), format, out)
        }
    }
}

pub fn parse_budget_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("invalid budget `{s}`")))
        .collect()
}

pub fn cmd_solve(input: &Path, engine: Engine, format: Format, out: &mut dyn Write) -> Result<i32> {
    let instance = instance_file::read(input)?.single()?;
    let outcome = solve(&instance, engine, &SolverOptions::default())?;
    let text = match format {
        Format::Table => report::solve_table(&instance, &outcome),
        Format::Json => report::solve_json(&instance, &outcome)?,
        Format::Csv => report::solve_csv(&instance, &outcome)?,
    };
    out.write_all(text.as_bytes())?;
    Ok(if outcome.is_optimal() { EXIT_OK } else { EXIT_INFEASIBLE })
}

pub fn cmd_sweep(
    input: &Path,
    budgets: Option<Vec<f64>>,
    engine: Engine,
    output: &Path,
    out: &mut dyn Write,
) -> Result<i32> {
    let parsed = instance_file::read(input)?;
    let budgets = parsed.sweep_budgets(budgets)?;
    let report = run_sweep(&parsed.instance, &budgets, engine, &SolverOptions::default());
    fs::create_dir_all(output).with_context(|| format!("cannot create {}", output.display()))?;
    let assignments = output.join("assignments.csv");
    let contributions = output.join("contributions.csv");
    let mut buf = Vec::new();
    report::write_assignments(&mut buf, &parsed.instance, &report)?;
    fs::write(&assignments, &buf).with_context(|| format!("cannot write {}", assignments.display()))?;
    buf.clear();
    report::write_contributions(&mut buf, &parsed.instance, &report)?;
    fs::write(&contributions, &buf).with_context(|| format!("cannot write {}", contributions.display()))?;
    out.write_all(report::sweep_summary(&report).as_bytes())?;
    writeln!(out, "wrote {} and {}", assignments.display(), contributions.display())?;
    if let Some(e) = report.entries.iter().find(|e| e.status_name() == "error") {
        bail!("budget {} failed", e.budget);
    }
    Ok(EXIT_OK)
}

pub fn cmd_export_lp(input: &Path, output: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let instance = instance_file::read(input)?.single()?;
    match output {
        Some(path) => layerguard::write_lp(&instance, path).with_context(|| format!("cannot export to {}", path.display()))?,
        None => out.write_all(layerguard::export_lp(&instance)?.as_bytes())?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_simulate(
    input: &Path,
    trials: u64,
    seed: u64,
    partitions: usize,
    engine: Engine,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32> {
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let instance = instance_file::read(input)?.single()?;
    let outcome = solve(&instance, engine, &SolverOptions::default())?;
    let Some(alloc) = outcome.allocation else {
        writeln!(
            out,
            "status: infeasible; minimum feasible budget is {}, nothing to simulate",
            outcome.min_feasible_budget
        )?;
        return Ok(EXIT_INFEASIBLE);
    };
    let config = SimulationConfig::new(trials, seed).partitioned(partitions, partitions > 1);
    let result = estimate_detection_with(&alloc, &instance, &config)?;
    let text = match format {
        Format::Table => report::simulation_table(alloc.objective, &result),
        Format::Json => report::simulation_json(alloc.objective, &result)?,
        Format::Csv => report::simulation_csv(alloc.objective, &result),
    };
    out.write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}
