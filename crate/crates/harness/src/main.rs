use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wks_harness::commands::{self, AdversaryConfig, SimulateConfig, SpcKind};
use wks_harness::config::{read_requests, require_positive, resolve_weights, universe};
use wks_harness::suites::{run_suite, Suite, SuiteParams, SuiteReport};
use wks_harness::{HarnessError, Result};

/// Weighted k-server experiments on uniform metrics.
#[derive(Parser)]
#[command(name = "wks", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the composed online algorithm over seeded trials.
    Simulate(SimulateArgs),
    /// Run the lower-bound adversary against the revealed-pattern algorithm.
    Adversary(AdversaryArgs),
    /// Exact offline optima for one request sequence.
    Opt(OptArgs),
    /// Run property suites and print a JSON report.
    Verify(VerifyArgs),
    /// Print the level constants n, H(n), the ratio constants and, with --beta, the adversary constants.
    Ratio(RatioArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Number of servers (defaults to the number of weights).
    #[arg(long)]
    k: Option<usize>,
    /// Number of points in the uniform metric.
    #[arg(long)]
    universe: u32,
    /// Comma-separated non-decreasing weights, e.g. 1,10 or 1/2,3.
    #[arg(long)]
    weights: Option<String>,
    /// Use weights 1, beta, ..., beta^(k-1).
    #[arg(long)]
    beta: Option<u64>,
    /// File of point indices separated by whitespace or commas.
    #[arg(long, conflicts_with = "random")]
    requests: Option<PathBuf>,
    /// Generate a random sequence of this length from the master seed.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Pattern constructor: oracle, lazy or random.
    #[arg(long, default_value = "oracle")]
    spc: String,
    /// Directory for trace files and CSV summaries.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    beta: u64,
    /// Top-level strategy calls per trial.
    #[arg(long, default_value_t = 500)]
    calls: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptArgs {
    #[command(flatten)]
    instance: InstanceArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or "all".
    #[arg(long, default_value = "all")]
    suite: String,
    /// Sample count (random instances, seeds or trials, depending on the suite).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    beta: Option<u64>,
}

fn instance(a: &InstanceArgs) -> Result<(wks_core::Universe, wks_core::Weights, Option<Vec<u32>>)> {
    let u = universe(a.universe)?;
    let w = resolve_weights(a.weights.as_deref(), a.beta, a.k)?;
    let reqs = a.requests.as_deref().map(|p| read_requests(p, u)).transpose()?;
    Ok((u, w, reqs))
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            require_positive("--trials", a.trials)?;
            let (u, w, reqs) = instance(&a.instance)?;
            let cfg = SimulateConfig {
                universe: u,
                weights: w,
                requests: reqs,
                random_len: a.instance.random,
                trials: a.trials,
                seed: a.instance.seed,
                spc: a.spc.parse::<SpcKind>()?,
                out: a.out,
            };
            let s = commands::simulate(&cfg)?;
            println!("metric,n,mean,ci95");
            for (name, m) in [("rsp_cost", s.rsp_cost), ("ratio_to_spc", s.ratio_to_spc), ("ratio_to_opt", s.ratio_to_opt)] {
                println!("{name},{},{:.6},{:.6}", m.n, m.mean, m.ci95);
            }
        }
        Command::Adversary(a) => {
            let (s, _) = commands::adversary(&AdversaryConfig {
                k: a.k,
                beta: a.beta,
                calls: a.calls,
                trials: a.trials,
                seed: a.seed,
                out: a.out,
            })?;
            print_json(&s);
        }
        Command::Opt(a) => {
            let (u, w, reqs) = instance(&a.instance)?;
            let reqs = match (reqs, a.instance.random) {
                (Some(r), _) => r,
                (None, Some(t)) if t > 0 => {
                    let mut r = wks_harness::seeding::rng(wks_harness::seeding::trial_seed(a.instance.seed, u64::MAX));
                    wks_harness::instances::random_requests(&mut r, u, t)
                }
                _ => return Err(HarnessError::Validation("give --requests or a positive --random".into())),
            };
            print_json(&commands::opt(&reqs, &w, u)?);
        }
        Command::Verify(a) => {
            let suites: Vec<Suite> = if a.suite == "all" {
                Suite::ALL.to_vec()
            } else {
                a.suite.split(',').map(str::parse).collect::<Result<_>>()?
            };
            let params = SuiteParams {
                seed: a.seed,
                samples: a.trials,
            };
            let reports: Vec<SuiteReport> = suites.into_iter().map(|s| run_suite(s, params)).collect::<Result<_>>()?;
            let text = serde_json::to_string_pretty(&reports).expect("serializable");
            println!("{text}");
            if let Some(path) = a.out {
                std::fs::write(&path, text + "\n").map_err(|e| HarnessError::io(&path, e))?;
            }
            if let Some(r) = reports.iter().find(|r| !r.passed) {
                return Err(HarnessError::SuiteFailed(format!(
                    "{}: {}",
                    r.suite,
                    r.counterexample.as_deref().unwrap_or("failed")
                )));
            }
        }
        Command::Ratio(a) => {
            let rows = commands::constants(a.k, a.beta)?;
            println!("level,n,harmonic_n,ratio_constant,adversary_constant");
            for r in rows {
                println!(
                    "{},{},{},{},{}",
                    r.level,
                    r.n,
                    r.harmonic_n.unwrap_or_default(),
                    r.ratio_constant.unwrap_or_default(),
                    r.adversary_constant.unwrap_or_default()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
