use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wsn_cli::commands::{cmd_simulate, cmd_sweep, cmd_tpbvp, cmd_validate, Overrides};
use wsn_cli::scenario::PolicyName;
use wsn_cli::trace::termination_str;
use wsn_cli::CliError;

/// Lifetime simulation and routing optimization for wireless sensor
/// networks with a mobile source.
#[derive(Parser)]
#[command(name = "wsnlife", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OverrideArgs {
    /// Routing policy, overriding the scenario file.
    #[arg(long, value_enum)]
    policy: Option<PolicyName>,
    /// Relay-protection weight for policy p2.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Random-walk seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Step length in time units.
    #[arg(long)]
    delta: Option<f64>,
    /// Death threshold as a fraction of initial energy.
    #[arg(long)]
    threshold: Option<f64>,
    /// Directory for trace output (default: the scenario's output.dir).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl OverrideArgs {
    fn build(&self) -> Overrides {
        Overrides {
            policy: self.policy,
            epsilon: self.epsilon,
            seed: self.seed,
            delta: self.delta,
            threshold: self.threshold,
            out_dir: self.out_dir.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the discrete lifetime simulation and write its trace.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Rerun the simulation across several p2 weights and compare.
    SweepEpsilon {
        scenario: PathBuf,
        /// Comma-separated weights, e.g. 0.5,1,8.
        #[arg(long, value_delimiter = ',', required = true)]
        epsilon: Vec<f64>,
        /// Random-walk seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Step length in time units.
        #[arg(long)]
        delta: Option<f64>,
        /// Death threshold as a fraction of initial energy.
        #[arg(long)]
        threshold: Option<f64>,
        /// Directory for trace output (default: the scenario's output.dir).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Solve the continuous-time optimality system by shooting.
    Tpbvp {
        scenario: PathBuf,
        /// Death threshold as a fraction of initial energy.
        #[arg(long)]
        threshold: Option<f64>,
        /// Directory for trace output (default: the scenario's output.dir).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Parse and validate a scenario, reporting every violation.
    Validate { scenario: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            scenario,
            overrides,
        } => {
            let report = cmd_simulate(&scenario, &overrides.build())?;
            println!(
                "lifetime {}  termination {}  steps {}",
                report.lifetime,
                termination_str(report.termination),
                report.steps
            );
            println!("trace   {}", report.trace_path.display());
            println!("summary {}", report.summary_path.display());
        }
        Command::SweepEpsilon {
            scenario,
            epsilon,
            seed,
            delta,
            threshold,
            out_dir,
        } => {
            let ov = Overrides {
                seed,
                delta,
                threshold,
                out_dir,
                ..Overrides::default()
            };
            let report = cmd_sweep(&scenario, &epsilon, &ov)?;
            println!("{:>10}  {:>18}  {:>12}  {:>8}", "epsilon", "lifetime", "termination", "steps");
            for row in &report.rows {
                println!(
                    "{:>10}  {:>18}  {:>12}  {:>8}",
                    row.epsilon,
                    row.lifetime,
                    termination_str(row.termination),
                    row.steps
                );
            }
            println!("table   {}", report.table_path.display());
        }
        Command::Tpbvp {
            scenario,
            threshold,
            out_dir,
        } => {
            let ov = Overrides {
                threshold,
                out_dir,
                ..Overrides::default()
            };
            let report = cmd_tpbvp(&scenario, &ov)?;
            println!(
                "T {}  nu {}  mu ({}, {})  residual_norm {:e}  iterations {}",
                report.t_final,
                report.nu,
                report.mu.0,
                report.mu.1,
                report.residual_norm,
                report.iterations
            );
            println!("trace   {}", report.trace_path.display());
            println!("summary {}", report.summary_path.display());
        }
        Command::Validate { scenario } => {
            cmd_validate(&scenario)?;
            println!("scenario ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
