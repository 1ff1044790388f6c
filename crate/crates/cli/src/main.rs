//! `darboux`: structural checks, flows and reports for configured systems.
//!
//! Exit codes: 0 when every check passes (or a flow completes), 1 when a
//! check fails or a flow aborts mid-run, 2 for configuration, parse and I/O
//! errors.

mod config;
mod expr;
mod flow;
mod suite;

use clap::{Parser, Subcommand, ValueEnum};
use flow::GeneratorKind;
use std::path::PathBuf;
use suite::SuiteOptions;

#[derive(Parser)]
#[command(
    name = "darboux",
    version,
    about = "Geometric consistency checks and quasi-static flows for \
             homogeneous thermodynamic systems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the check suite; JSON report on stdout, readable lines on stderr
    Check {
        /// Config file path, or one of the built-in system ids
        config: String,
        #[command(flatten)]
        opts: CheckArgs,
    },
    /// Run the check suite and write the JSON report to a file
    Report {
        /// Config file path, or one of the built-in system ids
        config: String,
        /// Where to write the JSON report
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: CheckArgs,
    },
    /// Integrate a flow and write the trajectory as CSV
    Flow {
        /// Config file path, or one of the built-in system ids
        config: String,
        /// Which flow to integrate
        #[arg(long, value_enum)]
        generator: Generator,
        /// Where to write the trajectory CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in systems
    Systems,
}

#[derive(clap::Args)]
struct CheckArgs {
    /// Override the geometric check tolerances
    #[arg(long)]
    tolerance: Option<f64>,
    /// Seed for the sampled checks
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Grid points per axis for the gridded checks
    #[arg(long, default_value_t = 5)]
    grid: usize,
}

impl CheckArgs {
    fn suite_options(&self) -> SuiteOptions {
        SuiteOptions {
            tolerance: self.tolerance,
            seed: self.seed,
            grid: self.grid.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Generator {
    /// Equilibrium flow on the contact graph
    Restricted,
    /// Flow of the scaling charge, rescaling coordinates and momenta
    #[value(alias = "X_G", alias = "x_g", alias = "xg")]
    Charge,
    /// Flow of the extended Hamiltonian
    #[value(alias = "X_H", alias = "x_h", alias = "xh")]
    Process,
}

impl From<Generator> for GeneratorKind {
    fn from(g: Generator) -> GeneratorKind {
        match g {
            Generator::Restricted => GeneratorKind::Restricted,
            Generator::Charge => GeneratorKind::Charge,
            Generator::Process => GeneratorKind::Process,
        }
    }
}

fn main() {
    std::process::exit(run(Cli::parse()));
}

fn run(cli: Cli) -> i32 {
    match cli.cmd {
        Cmd::Check { config, opts } => check(&config, &opts.suite_options(), None),
        Cmd::Report { config, out, opts } => check(&config, &opts.suite_options(), Some(&out)),
        Cmd::Flow {
            config,
            generator,
            out,
        } => run_flow(&config, generator.into(), &out),
        Cmd::Systems => {
            for id in config::BUILTIN_IDS {
                println!("{id:<14} {}", config::builtin_summary(id));
            }
            0
        }
    }
}

fn check(config: &str, opts: &SuiteOptions, out: Option<&PathBuf>) -> i32 {
    let cfg = match config::load(config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    let report = suite::run_check_suite(&cfg, opts);
    for c in &report.checks {
        eprintln!("{}", suite::describe(c));
    }
    eprintln!(
        "{}: {} ({}/{} checks passed)",
        report.system,
        if report.pass { "pass" } else { "FAIL" },
        report.checks.iter().filter(|c| c.pass).count(),
        report.checks.len()
    );
    let json = report.to_json();
    match out {
        None => print!("{json}"),
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("cannot write {}: {e}", path.display());
                return 2;
            }
            eprintln!("wrote {}", path.display());
        }
    }
    if report.pass {
        0
    } else {
        1
    }
}

fn run_flow(config: &str, kind: GeneratorKind, out: &PathBuf) -> i32 {
    let cfg = match config::load(config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    let result = match flow::run_flow(&cfg, kind) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    if let Err(e) = std::fs::write(out, &result.csv) {
        eprintln!("cannot write {}: {e}", out.display());
        return 2;
    }
    eprintln!("{}", result.summary);
    match result.abort {
        Some((step, msg)) => {
            eprintln!("flow aborted at step {step}: {msg}");
            1
        }
        None => 0,
    }
}
