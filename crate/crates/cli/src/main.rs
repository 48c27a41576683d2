use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use phaseret_cli::commands::{cmd_demo, cmd_lln, cmd_retrieve, cmd_verify, CommonOpts};

#[derive(Parser)]
#[command(
    name = "phaseret",
    about = "STFT phase retrieval experiments on products of cyclic groups and integer lines",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the end-to-end retrieval pipeline over a seed sweep.
    Retrieve {
        #[arg(long)]
        config: PathBuf,
        /// Seed override: a count `N`, a range `A..B`, or a list `1,2,3`.
        #[arg(long)]
        seeds: Option<String>,
        /// Worker threads for the seed sweep.
        #[arg(long)]
        workers: Option<usize>,
        /// Dump stage matrices for the first seed as CSV.
        #[arg(long)]
        dump_matrices: bool,
        /// Output directory (default: the config's [run].out_dir, then
        /// `phaseret-out`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Emit uniqueness or completeness certificates.
    Verify {
        /// What to verify: `uniqueness` or `completeness`.
        what: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Law-of-large-numbers trajectories for the Steinhaus draw products.
    Lln {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the bundled Z/4 x Z/9 example and print a summary.
    Demo {
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Machine-readable error record on every failure path.
            let record = json!({
                "status": "error",
                "error": format!("{e:#}"),
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Retrieve {
            config,
            seeds,
            workers,
            dump_matrices,
            out_dir,
        } => {
            let (record, out_dir) = cmd_retrieve(&CommonOpts {
                config,
                seeds,
                workers,
                out_dir,
                dump_matrices,
            })?;
            let a = &record.aggregate;
            println!(
                "retrieve: {} runs, {} recovered, {} excluded (condition), {} errored; pass rate {:.3}",
                a.total, a.recovered, a.excluded, a.errored, a.pass_rate
            );
            if let Some(m) = a.median_recovery_error {
                println!("median recovery error {m:.3e}");
            }
            println!("report written to {}", out_dir.join("report.json").display());
            Ok(())
        }
        Command::Verify {
            what,
            config,
            seeds,
            workers,
            out_dir,
        } => {
            let (record, out_dir) = cmd_verify(
                &CommonOpts {
                    config,
                    seeds,
                    workers,
                    out_dir,
                    dump_matrices: false,
                },
                &what,
            )?;
            let a = &record.aggregate;
            println!(
                "verify {what}: {} checks, {} valid, {} errored; pass rate {:.3}",
                a.total, a.recovered, a.errored, a.pass_rate
            );
            println!("report written to {}", out_dir.join("report.json").display());
            Ok(())
        }
        Command::Lln {
            config,
            seeds,
            out_dir,
        } => {
            let (record, out_dir) = cmd_lln(&CommonOpts {
                config,
                seeds,
                workers: None,
                out_dir,
                dump_matrices: false,
            })?;
            for c in &record.cases {
                match (c.constant_case, c.bound_pass_rate, c.max_rel_deviation) {
                    (true, _, Some(dev)) => println!(
                        "lln {} {}: constant at {:.6e}, max rel deviation {dev:.2e}",
                        c.kind, c.case, c.limit_re
                    ),
                    (false, Some(rate), _) => println!(
                        "lln {} {}: zero limit, bound pass rate {rate:.3}",
                        c.kind, c.case
                    ),
                    _ => {}
                }
            }
            println!(
                "trajectories written to {}",
                out_dir.join("trajectories.csv").display()
            );
            Ok(())
        }
        Command::Demo { seeds, out_dir } => {
            let (record, out_dir) = cmd_demo(out_dir.as_deref(), seeds.as_deref())?;
            let a = &record.aggregate;
            println!(
                "demo (Z/4 x Z/9): {} runs, {} recovered at <= 1e-6, {} excluded, {} errored",
                a.total, a.recovered, a.excluded, a.errored
            );
            for o in record.per_seed.iter().take(10) {
                if let Some(r) = &o.report {
                    println!(
                        "  seed {:>3}: error {:.3e}, worst condition {:.3e}, residual {:.3e}",
                        o.seed, r.recovery_error, r.worst_condition, r.rank_one_residual
                    );
                }
            }
            println!("report written to {}", out_dir.join("report.json").display());
            Ok(())
        }
    }
}
