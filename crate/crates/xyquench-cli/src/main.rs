use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use xyquench::scenario::{run, selftest, write_csv, Engine, ScenarioConfig, ScenarioError};

#[derive(Parser)]
#[command(name = "xyquench", version, about = "Entanglement dynamics of the XY chain on (site, time) grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write `measure,x,t,value` rows.
    Run {
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the engine named in the config.
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare the analytic engine with exact diagonalization.
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Analytic,
    Oracle,
}

fn set_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(k) = threads {
        anyhow::ensure!(k > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}

fn run_scenario(config: PathBuf, out: Option<PathBuf>, engine: Option<EngineArg>) -> Result<(), ScenarioError> {
    let text = std::fs::read_to_string(&config)
        .map_err(|e| ScenarioError::Config { field: config.display().to_string(), msg: e.to_string() })?;
    let mut cfg = ScenarioConfig::read(&text)?;
    match (engine, cfg.engine) {
        (Some(EngineArg::Analytic), _) => cfg = cfg.with_engine(Engine::Analytic),
        (Some(EngineArg::Oracle), Engine::Analytic) => cfg = cfg.with_engine(Engine::Oracle { sites: 12 }),
        _ => {}
    }
    cfg.validate()?;
    let result = run(&cfg)?;
    match out {
        Some(path) => write_csv(&result, BufWriter::new(File::create(path)?))?,
        None => write_csv(&result, BufWriter::new(io::stdout().lock()))?,
    }
    Ok(())
}

fn run_selftest() -> Result<bool, ScenarioError> {
    let checks = selftest()?;
    for c in &checks {
        println!(
            "{} {:<40} cells={:<5} max|diff|={:.3e} tol={:.0e}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.cells,
            c.max_diff,
            c.tolerance
        );
    }
    Ok(checks.iter().all(|c| c.passed()))
}

fn report(e: &ScenarioError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match &cli.command {
        Command::Run { threads, .. } | Command::Selftest { threads } => *threads,
    };
    if let Err(e) = set_threads(threads) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Run { config, out, engine, .. } => match run_scenario(config, out, engine) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => report(&e),
        },
        Command::Selftest { .. } => match run_selftest() {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(3),
            Err(e) => report(&e),
        },
    }
}
