//! File formats, sweep orchestration and the command line around
//! [`chd_core`].
//!
//! # Seeding
//!
//! Every cell (combination, SNR point, replication `r`) runs a fresh engine
//! seeded with `chd_core::engine::cell_seed(seed, r)`. The cell seed does not
//! depend on the combination or the SNR point, so all cells of one
//! replication share channel, traffic and noise realisations and any single
//! row can be reproduced from `seed`, `replication` and its config values.

pub mod config;
pub mod output;

use std::path::PathBuf;

use chd_core::engine::{cell_seed, Engine};
use chd_core::SimConfig;
use rayon::prelude::*;

pub use config::{load_config, parse_config, ExperimentSpec, Sweeps};
pub use output::{read_csv, read_rows, write_csv, write_rows, PendingOutput, ResultRow};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("simulation aborted: {0}")]
    Sim(#[from] chd_core::Error),
}

impl SimError {
    /// Process exit code: 1 for configuration and IO problems, 2 for
    /// failures during simulation.
    pub fn exit_code(&self) -> u8 {
        match self {
            SimError::Sim(_) => 2,
            _ => 1,
        }
    }
}

/// One independent unit of work.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub combination: usize,
    pub snr_index: usize,
    pub replication: u64,
    pub config: SimConfig,
}

impl Cell {
    pub fn snr_db(&self) -> f64 {
        self.config.snr_db[self.snr_index]
    }

    pub fn run(&self) -> Result<ResultRow, SimError> {
        let seed = cell_seed(self.config.seed, self.replication);
        let stats = Engine::new(&self.config, self.snr_db(), seed)?.run_to_completion()?;
        Ok(ResultRow::new(&self.config, self.snr_db(), self.replication, &stats))
    }
}

/// Cells in CSV row order: combination, then SNR point, then replication.
pub fn cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let mut out = Vec::new();
    for (combination, config) in spec.configs().into_iter().enumerate() {
        for snr_index in 0..config.snr_db.len() {
            for replication in 0..spec.replications {
                out.push(Cell {
                    combination,
                    snr_index,
                    replication,
                    config: config.clone(),
                });
            }
        }
    }
    out
}

/// Runs every cell, `jobs` at a time (all cores when `None`).
pub fn run_spec(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<Vec<ResultRow>, SimError> {
    let cells = cells(spec);
    let work = || cells.par_iter().map(Cell::run).collect::<Result<Vec<_>, _>>();
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SimError::Config(format!("jobs: {e}")))?
            .install(work),
        None => work(),
    }
}
