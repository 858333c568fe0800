use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ebola_ocp::runner::{self, presets, Scenario};
use ebola_ocp::{Execution, StrategyTag};

const OUT_ENV: &str = "EBOLA_OCP_OUT_DIR";

/// Optimal vaccination, treatment and education controls for SIR/SEIR epidemics.
#[derive(Parser)]
#[command(name = "ebola-ocp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write CSVs, a summary and a plot script.
    Run {
        /// Scenario file, preset name, or `preset:strategy`.
        scenario: String,
        /// Replace the scenario's strategy.
        #[arg(long, value_name = "TAG")]
        strategy: Option<StrategyTag>,
        /// Root directory; artifacts go to DIR/<scenario name>.
        #[arg(long, value_name = "DIR", env = OUT_ENV)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_plots: bool,
    },
    /// Solve several scenarios on a common grid and tabulate the results.
    Compare {
        /// Scenario files or presets; `preset:all` expands to every strategy of the preset's model.
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Directory for comparison.csv and one subdirectory per scenario.
        #[arg(long, value_name = "DIR", env = OUT_ENV)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_plots: bool,
        /// Solve one scenario at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// List built-in presets.
    Presets,
}

enum Failure {
    Invalid(ebola_ocp::Error),
    Unconverged,
}

impl From<ebola_ocp::Error> for Failure {
    fn from(e: ebola_ocp::Error) -> Self {
        Failure::Invalid(e)
    }
}

fn expand(spec: &str) -> ebola_ocp::Result<Vec<Scenario>> {
    if let Some(name) = spec.strip_suffix(":all") {
        if let Some(family) = presets::preset_family(name) {
            return Ok(family);
        }
    }
    runner::resolve_scenario(spec).map(|s| vec![s])
}

fn run(
    spec: &str,
    strategy: Option<StrategyTag>,
    out: Option<PathBuf>,
    no_plots: bool,
) -> Result<(), Failure> {
    let mut scenario = runner::resolve_scenario(spec)?;
    if let Some(tag) = strategy {
        scenario.strategy = tag;
        scenario.validate()?;
    }
    if let Some(root) = out {
        scenario.output_dir = root.join(&scenario.name);
    }
    if no_plots {
        scenario.emit_plots = false;
    }
    let artifacts = runner::run(&scenario)?;
    print!("{}", artifacts.summary.to_text());
    println!("output = {}", artifacts.dir.display());
    if artifacts.summary.converged {
        Ok(())
    } else {
        Err(Failure::Unconverged)
    }
}

fn compare(specs: &[String], out: Option<PathBuf>, no_plots: bool, sequential: bool) -> Result<(), Failure> {
    let mut scenarios = Vec::new();
    for spec in specs {
        scenarios.extend(expand(spec)?);
    }
    let dir = out.unwrap_or_else(|| PathBuf::from("out").join("comparison"));
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let result = runner::write_comparison(&dir, &scenarios, exec, !no_plots)?;
    print!("{}", result.table);
    println!("output = {}", dir.display());
    if result.table.all_converged() {
        Ok(())
    } else {
        Err(Failure::Unconverged)
    }
}

fn list_presets() {
    for name in presets::PRESET_NAMES {
        println!("{name}\t{}", presets::describe(name).unwrap_or(""));
    }
    let tags: Vec<&str> = StrategyTag::ALL.iter().map(|t| t.as_str()).collect();
    println!();
    println!("strategies: {}", tags.join(", "));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            strategy,
            out,
            no_plots,
        } => run(&scenario, strategy, out, no_plots),
        Command::Compare {
            scenarios,
            out,
            no_plots,
            sequential,
        } => compare(&scenarios, out, no_plots, sequential),
        Command::Presets => {
            list_presets();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Unconverged) => {
            eprintln!("error: solver did not converge; artifacts were written with converged = false");
            ExitCode::from(2)
        }
    }
}
