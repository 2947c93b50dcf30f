use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ergodic_lattice::harness::{run, Command, ExperimentConfig};
use ergodic_lattice::{Error, Result};

#[derive(Parser)]
#[command(name = "ergodic-lattice", version, about = "Lattice coding experiments for ergodic block-fading channels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ergodic capacity against SNR.
    Capacity(Common),
    /// Capacity, gap bound and rate at a fixed quantizer or discrete law.
    Gap(Common),
    /// Grid search over equal-probability quantizers.
    Quantize(Common),
    /// Monte Carlo end-to-end trials.
    Simulate(Common),
    /// White-input capacity and universal rate for the 2x2 discrete channel.
    Fig1(Common),
    /// Optimized quantizer gap for Rayleigh block fading.
    Fig2(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; defaults to `output_path` or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn summary_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".summary.csv");
    PathBuf::from(s)
}

fn execute(cli: Cli) -> Result<bool> {
    let (command, common, needs_config) = match cli.command {
        Cmd::Capacity(c) => (Command::Capacity, c, true),
        Cmd::Gap(c) => (Command::Gap, c, true),
        Cmd::Quantize(c) => (Command::Quantize, c, true),
        Cmd::Simulate(c) => (Command::Simulate, c, true),
        Cmd::Fig1(c) => (Command::Fig1, c, false),
        Cmd::Fig2(c) => (Command::Fig2, c, false),
    };
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if needs_config => return Err(Error::Config("--config is required for this command".into())),
        None => ExperimentConfig::parse("", Path::new("."))?,
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    let output = run(command, &cfg)?;
    match common.out.or(cfg.output_path.clone()) {
        Some(path) => {
            std::fs::write(&path, &output.table)?;
            if let Some(summary) = &output.summary {
                std::fs::write(summary_path(&path), summary)?;
            }
        }
        None => print!("{}", output.table),
    }
    if let Some(summary) = &output.summary {
        eprint!("{summary}");
    }
    for failure in &output.failed_rows {
        eprintln!("row failed: {failure}");
    }
    Ok(output.failed_rows.is_empty())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
