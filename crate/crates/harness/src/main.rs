use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nes_harness::oracle::{oracle_roots, roots_section};
use nes_harness::{
    compare, parse_summary_csv, rank, resolve_problem, run_experiment, write_outputs, Algorithm, ExperimentConfig,
};
use nes_core::reduction::validate_scheme;

#[derive(Parser)]
#[command(name = "nes", about = "Multi-root experiments on nonlinear equation systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every problem × algorithm × run cell of a configuration file.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print reference roots of a suite problem or problem file as a `[roots]` section.
    Oracle { problem: String },
    /// Compare algorithms from a summary CSV.
    Stats {
        #[arg(long, default_value = "out/summary.csv")]
        summary: PathBuf,
        /// Signed-rank test of A against B over per-problem means.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        wilcoxon: Option<Vec<String>>,
        /// Friedman average ranks of every algorithm in the summary.
        #[arg(long)]
        rank: bool,
        #[arg(long, default_value = "igd")]
        indicator: String,
    },
    /// Parse a problem file and check its reduction scheme.
    Validate { problem: String },
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, jobs, seed, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return fail(1, format!("{}: {e}", config.display())),
            };
            let mut cfg = match ExperimentConfig::parse(&text) {
                Ok(c) => c,
                Err(e) => return fail(1, e),
            };
            cfg.jobs = jobs.unwrap_or(cfg.jobs);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.out = out.unwrap_or(cfg.out);
            if let Err(e) = cfg.validate() {
                return fail(1, e);
            }
            let result = match run_experiment(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(1, e),
            };
            if let Err(e) = write_outputs(&result, &cfg.out) {
                return fail(1, e);
            }
            println!(
                "{} runs written to {}",
                result.reports.len(),
                cfg.out.join("summary.csv").display()
            );
            for f in &result.failures {
                eprintln!("{} {} run {}: {}", f.problem, f.algorithm, f.run, f.error);
            }
            if result.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Command::Oracle { problem } => {
            let spec = match resolve_problem(&problem) {
                Ok(s) => s,
                Err(e) => return fail(1, e),
            };
            match oracle_roots(&spec.file) {
                Ok((method, roots)) => {
                    print!("{}", roots_section(method, &roots));
                    eprintln!("{} roots", roots.len());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(1, e),
            }
        }
        Command::Stats {
            summary,
            wilcoxon,
            rank: want_rank,
            indicator,
        } => {
            let rows = match std::fs::read_to_string(&summary)
                .map_err(|e| e.to_string())
                .and_then(|t| parse_summary_csv(&t).map_err(|e| e.to_string()))
            {
                Ok(r) => r,
                Err(e) => return fail(1, format!("{}: {e}", summary.display())),
            };
            if wilcoxon.is_none() && !want_rank {
                return fail(1, "nothing to do: pass --wilcoxon A B and/or --rank");
            }
            if let Some(pair) = wilcoxon {
                let parsed: Result<Vec<Algorithm>, _> = pair.iter().map(|s| s.parse()).collect();
                let algs = match parsed {
                    Ok(a) => a,
                    Err(e) => return fail(1, e),
                };
                match compare(&rows, algs[0], algs[1], &indicator) {
                    Ok(w) => println!(
                        "{} vs {} on mean {indicator} over {} problems: R+ = {}, R- = {}, p = {:.4e}",
                        algs[0], algs[1], w.n, w.r_plus, w.r_minus, w.p
                    ),
                    Err(e) => return fail(2, e),
                }
            }
            if want_rank {
                match rank(&rows, &indicator) {
                    Ok(ranks) => {
                        println!("algorithm,average_rank");
                        for (a, r) in ranks {
                            println!("{a},{r}");
                        }
                    }
                    Err(e) => return fail(2, e),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { problem } => {
            let spec = match resolve_problem(&problem) {
                Ok(s) => s,
                Err(e) => return fail(1, e),
            };
            let p = &spec.file.problem;
            println!("{}: {} variables, {} equations, roots: {}", p.name(), p.n(), p.m(), p.nor());
            if let Some(s) = &spec.file.scheme {
                if let Err(v) = validate_scheme(p, s) {
                    for e in v {
                        eprintln!("scheme: {e}");
                    }
                    return ExitCode::from(1);
                }
                println!("scheme: {} core variables, {} retained equations", s.q(), s.p());
            }
            ExitCode::SUCCESS
        }
    }
}
