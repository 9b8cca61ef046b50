use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use optbandits::{emit_plots, run_experiment, verify_suite, write_outputs, ExperimentConfig};

#[derive(Parser)]
#[command(name = "optbandits", version, about = "Optimistic Bayesian bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write transcripts and a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Added to every seed in the config.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
        /// Use the config's [full_scale] overrides.
        #[arg(long)]
        full_scale: bool,
        /// Output directory (default: the config's `output`, else `out/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn summary or snapshot files into plot data and SVG charts.
    Plot {
        /// Experiment output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance checks.
    Verify {
        /// Run only the named check.
        #[arg(long)]
        check: Option<String>,
        /// List check names and exit.
        #[arg(long)]
        list: bool,
    },
}

fn run(config: PathBuf, seed_offset: u64, full_scale: bool, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&config)?.with_seed_offset(seed_offset);
    if full_scale {
        cfg = cfg.full_scaled();
    }
    cfg.validate()?;
    let dir = out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    eprintln!(
        "running {} ({:?}, T = {}, {} seeds, {} agents)",
        cfg.name,
        cfg.kind,
        cfg.horizon,
        cfg.seeds.len(),
        cfg.agents.len()
    );
    let output = run_experiment(&cfg)?;
    let unconverged: usize = output
        .runs
        .iter()
        .map(|r| r.transcript.steps.iter().filter(|s| !s.converged).count())
        .sum();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} rounds flagged as not converged (see the converged column)");
    }
    for p in write_outputs(&output, &dir).with_context(|| format!("writing to {}", dir.display()))? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed_offset,
            full_scale,
            out,
        } => run(config, seed_offset, full_scale, out),
        Command::Plot { out } => emit_plots(&out).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        Command::Verify { check, list } => {
            if list {
                for c in optbandits::verify::CHECKS {
                    println!("{:<24} {}", c.name, c.summary);
                }
                return ExitCode::SUCCESS;
            }
            match verify_suite(check.as_deref()) {
                Ok(reports) => {
                    for r in &reports {
                        println!("{r}");
                    }
                    let failed = reports.iter().filter(|r| !r.passed).count();
                    println!("{} passed, {failed} failed", reports.len() - failed);
                    return if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE };
                }
                Err(e) => Err(e),
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
