//! `va-wightman run`: builds a model from a JSON config, runs the selected
//! verification suites in parallel, and writes one JSON report.
//!
//! Exit status is 0 when nothing failed (inconclusive checks do not count),
//! 1 when some check failed, and 2 when the config is invalid or the report
//! cannot be written.

mod config;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ModelName, Overrides, RunConfig, Suite};
use report::Report;
use suites::{run_suite, Context};

#[derive(Parser)]
#[command(name = "va-wightman", version, about = "Verification suites for truncated Möbius vertex algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a JSON report.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON file mirroring the run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    /// Central charge, e.g. "-22/5".
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Use the simple quotient.
    #[arg(long)]
    simple: bool,
    #[arg(long)]
    max_weight: Option<usize>,
    #[arg(long)]
    band: Option<usize>,
    #[arg(long)]
    margin: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; the report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            suite: self.suite,
            model: self.model,
            c: self.c.clone(),
            simple: self.simple,
            max_weight: self.max_weight,
            band: self.band,
            margin: self.margin,
            seed: self.seed,
            out: self.out.clone(),
        }
    }

    fn resolve(&self) -> Result<RunConfig, String> {
        let o = self.overrides();
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::from_flags(&o)?,
        };
        cfg.apply(&o);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(args: &RunArgs) -> ExitCode {
    let cfg = match args.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let model = match cfg.build_model() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let ctx = Context { model: &model, config: &cfg };
    let suites = cfg.suite.expand();
    let entries = std::thread::scope(|s| {
        let handles: Vec<_> = suites.iter().map(|&suite| { let ctx = &ctx; s.spawn(move || run_suite(ctx, suite)) }).collect();
        handles.into_iter().flat_map(|h| h.join().expect("suite thread panicked")).collect::<Vec<_>>()
    });
    let report = Report::new(model.label(), cfg.clone(), entries);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &cfg.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text + "\n") {
                eprintln!("cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{text}"),
    }
    let s = &report.summary;
    eprintln!("{}: {} passed, {} failed, {} inconclusive", report.model, s.passed, s.failed, s.inconclusive);
    for e in report.checks.iter().filter(|e| e.status == report::Status::Fail) {
        eprintln!("  FAIL {} ({})", e.name, e.suite);
    }
    if report.failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(&args),
    }
}
