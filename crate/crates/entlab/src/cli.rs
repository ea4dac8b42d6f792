//! Argument parsing and dispatch for the `entlab` binary.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use entlab_core::decomp::OptimizerConfig;
use entlab_core::experiments::MemorySide;

use crate::batch::threads_from_env;
use crate::commands::{compute, sweep, verify, Measure, RunSettings, Suite, VerifyOptions};
use crate::generate::{generate, parse_grid, Family};
use crate::report::{Format, Report};
use crate::statefile::read_state;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "entlab", version, about = "Entanglement measures on density matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate measures on one state.
    Compute {
        #[command(flatten)]
        input: Input,
        /// Comma-separated: ree, ppt, ef, ea, ef-closed, sa, sb, s, mi.
        #[arg(long, default_value = "ree,ef,ea")]
        measures: String,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate measures along a one-parameter family.
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        /// START:STOP:STEP or a comma-separated list.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "ree")]
        measures: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite over seeded random states.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Memory maps per state (conjecture) or sampled memory measurements
        /// per state (ordering).
        #[arg(long, default_value_t = 4)]
        samples: usize,
        /// Party holding the memory in the conjecture suite.
        #[arg(long, value_enum, default_value_t = Side::Bob)]
        memory_side: Side,
        /// Include coherent partial dephasing among the conjecture maps.
        #[arg(long)]
        coherent: bool,
        /// Refine the worst conjecture map by local search.
        #[arg(long)]
        adversarial: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Side {
    Alice,
    Bob,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// Generator spec NAME:PARAMS, e.g. werner:0.5 or random:3:7.
    #[arg(long = "gen")]
    pub generator: Option<String>,
    /// JSON state file.
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optimizer restarts [default: 32, or 8 for verify].
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Decomposition size for ef and ea [default: min(rank², 16)].
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the report (verify: the per-item records) to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const VERIFY_RESTARTS: usize = 8;

impl Common {
    fn settings(&self, command: String, default_restarts: usize) -> Result<RunSettings, CliError> {
        let mut optimizer = OptimizerConfig::default().with_restarts(self.restarts.unwrap_or(default_restarts));
        if let Some(it) = self.max_iterations {
            optimizer.max_iterations = it;
        }
        optimizer.size_cap = self.size;
        if optimizer.restarts == 0 || optimizer.max_iterations == 0 {
            return Err(CliError::input("--restarts and --max-iterations must be positive"));
        }
        Ok(RunSettings {
            command,
            seed: self.seed,
            optimizer,
            threads: threads_from_env()?,
        })
    }
}

fn emit(report: &Report, format: Format, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = report.render(format);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Compute { input, measures, common } => {
            let measures = Measure::parse_list(&measures)?;
            let (rho, label) = match (&input.generator, &input.state) {
                (Some(spec), _) => (generate(spec)?, format!("gen={spec}")),
                (None, Some(path)) => (read_state(path)?, format!("state={}", path.display())),
                (None, None) => return Err(CliError::input("one of --gen or --state is required")),
            };
            let names: Vec<&str> = measures.iter().map(|m| m.name()).collect();
            let settings = common.settings(format!("compute {label} --measures {}", names.join(",")), 32)?;
            let report = compute(&rho, &label, &measures, &settings)?;
            emit(&report, common.format, common.out.as_ref())?;
            Ok(0)
        }
        Command::Sweep {
            family,
            grid,
            measures,
            common,
        } => {
            let measures = Measure::parse_list(&measures)?;
            let values = parse_grid(&grid)?;
            let names: Vec<&str> = measures.iter().map(|m| m.name()).collect();
            let settings = common.settings(
                format!("sweep --family {} --grid {grid} --measures {}", family.name(), names.join(",")),
                32,
            )?;
            let report = sweep(family, &values, &measures, &settings)?;
            emit(&report, common.format, common.out.as_ref())?;
            Ok(0)
        }
        Command::Verify {
            suite,
            n,
            samples,
            memory_side,
            coherent,
            adversarial,
            common,
        } => {
            let opts = VerifyOptions {
                suite,
                n,
                samples,
                side: match memory_side {
                    Side::Alice => MemorySide::Alice,
                    Side::Bob => MemorySide::Bob,
                },
                coherent,
                adversarial,
            };
            let settings = common.settings(format!("verify {} --n {n}", suite.name()), VERIFY_RESTARTS)?;
            let outcome = verify(&opts, &settings)?;
            emit(&outcome.summary, common.format, None)?;
            if let Some(path) = &common.out {
                emit(&outcome.records, common.format, Some(path))?;
            }
            Ok(outcome.exit_code())
        }
    }
}

/// Entry point shared by the binary: parse, run, map errors to exit code 2.
pub fn main() -> std::process::ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return std::process::ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => std::process::ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(2)
        }
    }
}
