use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ipiag::problems::ProblemDocument;
use ipiag::{CertificateKind, Method};

use ipiag_cli::commands::{cmd_certify, cmd_compare, cmd_run, load_compare, write_compare, CheckStatus};
use ipiag_cli::config::{read_json, RunConfig, ScheduleConfig, ScheduleKind, Setting};
use ipiag_cli::CliError;

#[derive(Parser)]
#[command(name = "ipiag", version, about = "Inertial proximal incremental aggregated gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method on a problem and write trace.csv and summary.json.
    Run(RunArgs),
    /// Run every configuration of a comparison file and print a CSV table.
    Compare {
        /// Comparison JSON: a shared `problem` and a list of `runs`.
        spec: PathBuf,
        /// Overrides the file's repetition count for random schedules.
        #[arg(long)]
        repetitions: Option<usize>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the certified step size, inertia and rate for given constants.
    Certify {
        #[arg(long = "L")]
        lipschitz: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        tau: usize,
        #[arg(long, default_value_t = 0.0)]
        c1: f64,
        /// t1, t1tight, cor1 or cor2.
        #[arg(long, default_value = "t1", value_parser = parse_kind)]
        variant: CertificateKind,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Problem document (JSON).
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_parser = parse_method)]
    variant: Method,
    /// Step size, or `auto` for the certified value.
    #[arg(long, default_value = "auto")]
    alpha: Setting,
    #[arg(long, default_value = "auto")]
    eta1: Setting,
    #[arg(long, default_value = "auto")]
    eta2: Setting,
    /// Heavy-ball fraction for `auto` inertia (η₁ = C₁αβ).
    #[arg(long, default_value_t = 0.25)]
    c1: f64,
    /// Declared delay bound.
    #[arg(long, default_value_t = 4)]
    tau: usize,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = ScheduleKind::Uniform1)]
    schedule: ScheduleKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    iters: usize,
    #[arg(long)]
    label: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write plot.svg.
    #[arg(long)]
    plot: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: ipiag::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<CertificateKind, String> {
    s.parse().map_err(|e: ipiag::Error| e.to_string())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(args) => {
            let doc: ProblemDocument = read_json(&args.problem)?;
            let config = RunConfig {
                label: args.label,
                problem: None,
                variant: args.variant,
                alpha: args.alpha,
                eta1: args.eta1,
                eta2: args.eta2,
                c1: args.c1,
                schedule: ScheduleConfig { kind: args.schedule, workers: args.workers, tau: args.tau, seed: args.seed },
                iters: args.iters,
                out: Some(args.out.clone()),
                plot: args.plot,
            };
            let summary = cmd_run(&doc, &config, &args.out)?;
            let check = &summary.bound_check;
            println!(
                "{}: {} iterations, alpha={:e} eta1={:e} eta2={:e}, final dist2={}, bound check {:?}",
                summary.label,
                summary.iterations,
                summary.alpha,
                summary.eta1,
                summary.eta2,
                summary.final_dist2.map_or("n/a".into(), |d| format!("{d:e}")),
                check.status
            );
            if let Some(reason) = &check.reason {
                println!("  ({reason})");
            }
            Ok(if check.status == CheckStatus::Failed { 4 } else { 0 })
        }
        Command::Compare { spec, repetitions, out } => {
            let spec = load_compare(&spec)?;
            let rows = cmd_compare(&spec, repetitions)?;
            write_compare(&rows, out.as_ref())?;
            Ok(0)
        }
        Command::Certify { lipschitz, beta, tau, c1, variant } => {
            let cert = cmd_certify(lipschitz, beta, tau, c1, variant)?;
            println!("{}", cert.to_json()?);
            Ok(0)
        }
    }
}
