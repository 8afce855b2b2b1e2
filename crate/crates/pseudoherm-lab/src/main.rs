//! `pseudoherm-lab`: runs one named experiment, writes a JSON report and
//! CSV/JSON artifacts, and exits 0 (all checks pass), 1 (a check failed)
//! or 2 (usage or configuration error).

mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use experiments::{ensure_dir, Experiment};
use report::ExperimentReport;

#[derive(Parser)]
#[command(name = "pseudoherm-lab", version, about = "Numerical experiments in pseudohermitian geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(RunArgs),
    /// List experiments.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Flat JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    /// "heisenberg:n", "sphere:n" or "scaled-heisenberg:n:kappa".
    #[arg(long)]
    model: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration step.
    #[arg(long)]
    h: Option<f64>,
    /// Curve parameter range.
    #[arg(long)]
    tmax: Option<f64>,
    /// Seed for sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces kappa in a scaled-heisenberg model id.
    #[arg(long)]
    kappa: Option<f64>,
    /// Number of sample points or cases.
    #[arg(long)]
    samples: Option<usize>,
    /// Primary tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Overrides, config::ConfigError> {
        let file = match &self.config {
            Some(path) => Overrides::from_file(path)?,
            None => Overrides::default(),
        };
        Ok(file.merged(Overrides {
            experiment: self.experiment.clone(),
            model: self.model.clone(),
            out: self.out.clone(),
            h: self.h,
            tmax: self.tmax,
            seed: self.seed,
            kappa: self.kappa,
            samples: self.samples,
            tolerance: self.tolerance,
        }))
    }
}

const USAGE_ERROR: u8 = 2;

fn list() {
    for e in Experiment::ALL {
        println!("{:<18} {} [{}]", e.id(), e.description(), e.model_requirement());
    }
}

fn run(args: &RunArgs) -> ExitCode {
    let resolved = args.overrides().and_then(ExperimentConfig::resolve);
    let (cfg, exp, model) = match resolved {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    if let Err(e) = ensure_dir(&cfg.out) {
        eprintln!("error: cannot create {}: {e}", cfg.out.display());
        return ExitCode::from(USAGE_ERROR);
    }
    let start = Instant::now();
    let (outcome, error) = match exp.run(&cfg, &model) {
        Ok(o) => (o, None),
        Err(e) => (Default::default(), Some(e.to_string())),
    };
    let experiments::Outcome { checks, artifacts } = outcome;
    let report = ExperimentReport::new(cfg.clone(), checks, artifacts, error, start.elapsed().as_secs_f64());
    for c in &report.checks {
        println!("{:<4} {}", if c.pass { "ok" } else { "FAIL" }, c.name);
    }
    if let Some(e) = &report.error {
        println!("FAIL error: {e}");
    }
    match report.write(&cfg.out) {
        Ok(path) => println!("{} {} in {:.2} s, report {}", report.id, if report.pass { "passed" } else { "failed" }, report.wall_time_s, path.display()),
        Err(e) => {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::FAILURE;
        }
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Run(args) => run(&args),
    }
}
