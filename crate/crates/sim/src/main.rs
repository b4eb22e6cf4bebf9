use std::path::PathBuf;
use std::process::ExitCode;

use chd_sim::{load_config, run_spec, PendingOutput, SimError};
use clap::Parser;

/// Monte Carlo simulator for buffer-aided multi-way UAV relaying.
#[derive(Debug, Parser)]
#[command(name = "chd-sim", version)]
struct Cli {
    /// Experiment file (flat TOML).
    #[arg(long)]
    config: PathBuf,
    /// CSV output path [default: `out` from the config, else results.csv].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Packet groups per SNR point, overriding the config.
    #[arg(long)]
    packets: Option<u64>,
    /// Cells simulated in parallel [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
}

fn run(cli: Cli) -> Result<(), SimError> {
    let mut spec = load_config(&cli.config)?;
    if let Some(seed) = cli.seed {
        spec.base.seed = seed;
    }
    if let Some(packets) = cli.packets {
        spec.packets = Some(packets);
        spec.validate()?;
    }
    if cli.jobs == Some(0) {
        return Err(SimError::Config("jobs: must be positive".into()));
    }
    let path = cli
        .out
        .or(spec.out.clone())
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    let pending = PendingOutput::create(&path)?;
    let rows = run_spec(&spec, cli.jobs)?;
    pending.commit(&rows)?;
    eprintln!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
