use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use nashseek::LawKind;
use nashseek_cli::{commands, output};

#[derive(Parser)]
#[command(name = "nashseek", version, about = "Event-triggered distributed Nash-equilibrium seeking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Override the integration step.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the centralized equilibrium as JSON.
    SolveNe(Common),
    /// Print step-size bounds and the rate constant as JSON.
    Bounds(Common),
    /// One seeded run; writes CSV, JSON and SVG files.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Trigger law; defaults to the scenario's.
        #[arg(long)]
        law: Option<LawKind>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Seeded ensembles for several laws; writes a summary table and plots.
    Compare {
        #[command(flatten)]
        common: Common,
        /// First seed; run k uses seed + k.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "static,dynamic,stochastic")]
        laws: Vec<LawKind>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    let warn = |s: &nashseek::Scenario64| {
        for w in &s.warnings {
            eprintln!("warning: {w}");
        }
    };
    match cli.command {
        Command::SolveNe(c) => {
            let s = commands::load(&c.config, c.dt)?;
            warn(&s);
            output::write_json(std::io::stdout().lock(), &commands::solve_ne(&s)?)?;
        }
        Command::Bounds(c) => {
            let s = commands::load(&c.config, c.dt)?;
            warn(&s);
            output::write_json(std::io::stdout().lock(), &commands::bounds(&s)?)?;
        }
        Command::Simulate { common, seed, law, out } => {
            let s = commands::load(&common.config, common.dt)?;
            warn(&s);
            let law = law.unwrap_or(s.engine.law);
            let run = commands::simulate(&s, law, seed.unwrap_or(s.engine.seed), &out)?;
            eprintln!(
                "{law}: final error {:.6}, Gamma(T) {:.4}, {} events -> {}",
                run.final_error(),
                run.final_gamma(),
                run.events.len(),
                out.display()
            );
        }
        Command::Compare { common, seed, runs, laws, out } => {
            let s = commands::load(&common.config, common.dt)?;
            warn(&s);
            let runs = runs.unwrap_or(s.runs);
            let results = commands::compare(&s, &laws, runs, seed.unwrap_or(s.engine.seed), Some(&out))?;
            for r in &results {
                eprintln!(
                    "{:<11} mean Gamma(T) {:.4}  mean final error {:.6}",
                    r.law.name(),
                    r.final_mean_gamma,
                    r.mean_final_error
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
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
