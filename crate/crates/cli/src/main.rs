//! Scenario runner for the verification laboratory.
//!
//! Verbs: `seq validate|build`, `simulate`, `verify <suite>`, `report`.
//! Every run is fully determined by its scenario file and seed; the
//! default output directory comes from `BETAMIX_OUT` (flag overrides).

mod artifacts;
mod reportgen;
mod scenario;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};

use crate::scenario::{parse_sequence, Scenario};

#[derive(Parser)]
#[command(name = "betamix", version, about = "Simulation and exact-verification laboratory for a sparse multilevel coboundary process")]
struct Cli {
    /// Worker threads for Monte Carlo trials (default: all cores).
    /// Parallel and serial runs produce identical artifacts.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or validate level sequences.
    Seq {
        #[command(subcommand)]
        action: SeqAction,
    },
    /// Write path, functional, and field dumps for a scenario.
    Simulate(ScenarioArgs),
    /// Run a verification suite and write artifacts plus a summary.
    Verify {
        /// clt | nontight | variance | mixing | moments | divergence | all;
        /// defaults to the scenario's own suite key
        suite: Option<String>,
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Merge suite summaries into a consolidated report.
    Report {
        /// summary.json files produced by `verify`
        summaries: Vec<PathBuf>,
        /// Output base path; writes <base>.md and <base>.json
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum SeqAction {
    /// Validate growth conditions and print the report.
    Validate(SeqArgs),
    /// Build a sequence and print it as JSON.
    Build(SeqArgs),
}

#[derive(Args)]
struct SeqArgs {
    /// explicit:2,64,65600 | delta:0.1 | adaptive:inv-linear
    #[arg(long)]
    sequence: String,
    /// Level count for delta and adaptive sequences.
    #[arg(long, default_value_t = 0)]
    levels: usize,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (flat key = value lines).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (default: $BETAMIX_OUT or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ScenarioArgs {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            std::env::var_os("BETAMIX_OUT")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out"))
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Seq { action } => match action {
            SeqAction::Validate(args) => {
                let seq = parse_sequence(&args.sequence, args.levels)?;
                let report = seq.validate();
                println!("{}", serde_json::to_string_pretty(&report)?);
                let failures = report.failures();
                let usable = report.first_level_ok && report.doubling_everywhere;
                if !usable {
                    eprintln!("validation failed:");
                    for f in &failures {
                        eprintln!("  - {f}");
                    }
                } else if report.validated_from > 1 {
                    eprintln!(
                        "note: growth conditions hold from level {} on",
                        report.validated_from
                    );
                }
                Ok(usable)
            }
            SeqAction::Build(args) => {
                let seq = parse_sequence(&args.sequence, args.levels)?;
                println!("{}", serde_json::to_string_pretty(&seq)?);
                Ok(true)
            }
        },
        Command::Simulate(args) => {
            let sc = Scenario::parse_file(&args.scenario)?;
            suites::run_simulate(&sc, &args.out_dir())?;
            Ok(true)
        }
        Command::Verify { suite, args } => {
            let sc = Scenario::parse_file(&args.scenario)?;
            let suite = suite.unwrap_or_else(|| sc.suite.clone());
            let summary = suites::run_scenario(&sc, &suite, &args.out_dir())?;
            for check in &summary.checks {
                println!(
                    "{} [{}] {}: {}",
                    if check.pass { "pass" } else { "FAIL" },
                    check.claim,
                    check.id,
                    check.detail
                );
            }
            Ok(summary.all_pass())
        }
        Command::Report { summaries, out } => {
            if summaries.is_empty() {
                return Err(anyhow!("no summary files given"));
            }
            let report = reportgen::emit_report(&summaries, &out)?;
            println!(
                "{} checks, {} failed; wrote {} and {}",
                report.total_checks,
                report.failed_checks,
                out.with_extension("md").display(),
                out.with_extension("json").display()
            );
            Ok(report.failed_checks == 0)
        }
    }
}
