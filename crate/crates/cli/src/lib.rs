//! Command-line front end: scenario ingestion, dispatch and report emission.

pub mod commands;
pub mod error;
pub mod ledger;
pub mod report;
pub mod scenario;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;
use report::Report;

#[derive(Debug, Parser)]
#[command(name = "entrolab", version, about = "Entropy structure and admissibility experiments from JSON scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Scenario file.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Directory for `<command>.json` and `<command>.csv`; standard output otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit the CSV ledger (instead of JSON on standard output).
    #[arg(long, global = true)]
    pub csv: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Gauss order for space-time, shock-time and path quadrature.
    #[arg(long, global = true)]
    pub quad_order: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Registered systems and entropy pairs.
    Systems,
    /// Entropy-pair, symmetrizer, potential, convexity and homogeneity checks.
    Check,
    /// Exact Riemann solutions.
    Riemann,
    /// Action functionals, weak residuals and first variations.
    Action,
    /// Entropy-rate ranking of candidate solutions.
    Compare,
    /// Path products and path-independence probes.
    PathProduct,
    /// Print a JSON schema.
    Schema {
        #[arg(value_enum)]
        which: SchemaKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemaKind {
    Scenario,
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Systems => "systems",
            Self::Check => "check",
            Self::Riemann => "riemann",
            Self::Action => "action",
            Self::Compare => "compare",
            Self::PathProduct => "path-product",
            Self::Schema { .. } => "schema",
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let g = &cli.global;
    if let Command::Systems = cli.command {
        return Ok(commands::systems());
    }
    let path = g
        .scenario
        .as_ref()
        .ok_or_else(|| CliError::Input(format!("{} requires --scenario <file>", cli.command.name())))?;
    let scenario = scenario::load_scenario(path)?;
    let ctx = commands::Context::new(scenario, g.seed, g.quad_order)?;
    match cli.command {
        Command::Check => commands::check(&ctx),
        Command::Riemann => commands::riemann(&ctx),
        Command::Action => commands::action(&ctx),
        Command::Compare => commands::compare(&ctx),
        Command::PathProduct => commands::path_product(&ctx),
        Command::Systems | Command::Schema { .. } => unreachable!("handled before scenario loading"),
    }
}

fn emit(cli: &Cli, report: &Report, csv_requested: bool) -> Result<(), CliError> {
    let json = report::render(report)?;
    let name = cli.command.name();
    match &cli.global.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{name}.json")), json)?;
            if csv_requested {
                std::fs::write(dir.join(format!("{name}.csv")), ledger::render(report)?)?;
            }
        }
        None => {
            let text = if csv_requested { ledger::render(report)? } else { json };
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("schema serializes");
    s.push('\n');
    s
}

fn csv_requested(cli: &Cli) -> bool {
    if cli.global.csv {
        return true;
    }
    // The scenario may ask for the ledger; a scenario that fails to load is
    // reported by `execute`.
    cli.global
        .scenario
        .as_ref()
        .and_then(|p| scenario::load_scenario(p).ok())
        .is_some_and(|s| s.output.csv)
}

/// Runs the command and returns the process exit code: 0 on success, 1 when a
/// check or assertion failed, 2 on input, schema or library errors.
pub fn run(cli: &Cli) -> i32 {
    if let Command::Schema { which } = cli.command {
        let schema = match which {
            SchemaKind::Scenario => scenario::scenario_schema(),
            SchemaKind::Report => report::report_schema(),
        };
        print!("{}", pretty(&schema));
        return 0;
    }
    let outcome = match cli.global.jobs {
        Some(0) => Err(CliError::Input("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli)),
            Err(e) => Err(CliError::Input(format!("cannot start {n} workers: {e}"))),
        },
        None => execute(cli),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = emit(cli, &report, csv_requested(cli)) {
        eprintln!("error: {e}");
        return 2;
    }
    if report.failed() {
        for f in &report.failures {
            eprintln!("FAILED: {f}");
        }
        return 1;
    }
    0
}

/// Parses `args` and runs; clap usage errors exit with 2, help with 0.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
