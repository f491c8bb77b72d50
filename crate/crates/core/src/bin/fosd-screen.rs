use clap::{Parser, Subcommand};
use fosd_screen_core::scenario::{builtin_config, exit_code, list_builtins, run_batch, Overrides, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Posterior ordering checks for Bayesian screening scenarios.
#[derive(Parser)]
#[command(name = "fosd-screen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenarios given as builtin names or config paths.
    Run {
        #[arg(required = true)]
        targets: Vec<String>,
        /// FOSD probe points and CSV rows.
        #[arg(long)]
        grid: Option<usize>,
        /// FOSD tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Monte Carlo sample count.
        #[arg(long = "mc-n")]
        mc_n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Band half-width for point conditioning in the Monte Carlo oracle.
        #[arg(long)]
        bandwidth: Option<f64>,
        #[arg(long, default_value = "fosd-report")]
        out: PathBuf,
        /// Omit the timestamp line from output files.
        #[arg(long)]
        no_timestamp: bool,
        /// Write accepted Monte Carlo samples as little-endian f64 files.
        #[arg(long)]
        dump_samples: bool,
    },
    /// List builtin scenarios.
    List,
    /// Print the config of a builtin scenario.
    Show { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for n in list_builtins() {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Command::Show { name } => match builtin_config(&name) {
            Some(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("unknown builtin '{name}'");
                ExitCode::from(2)
            }
        },
        Command::Run {
            targets,
            grid,
            tol,
            mc_n,
            seed,
            bandwidth,
            out,
            no_timestamp,
            dump_samples,
        } => {
            let opts = RunOptions {
                out,
                timestamp: !no_timestamp,
                dump_samples,
                overrides: Overrides {
                    tol,
                    grid,
                    mc_n,
                    seed,
                    bandwidth,
                },
            };
            let results = run_batch(&targets, &opts);
            for (target, r) in &results {
                match r {
                    Ok(rep) if rep.passed() => println!("{target}: pass ({})", rep.dir.display()),
                    Ok(rep) => {
                        println!("{target}: FAIL ({})", rep.dir.display());
                        for f in &rep.failures {
                            println!("  {f}");
                        }
                    }
                    Err(e) => eprintln!("{target}: error: {e}"),
                }
            }
            ExitCode::from(exit_code(&results) as u8)
        }
    }
}
