//! Parallel execution of experiment paths.

use rayon::prelude::*;
use riskflow_core::scenario::{run_path, summarize, ExperimentConfig, PathResult, SummaryStats};

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "RISKFLOW_THREADS";

/// Worker count from `RISKFLOW_THREADS`, or all logical cores.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Input(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Runs all paths on a worker pool; results and summary are in path order.
pub fn run_parallel(config: &ExperimentConfig, threads: usize) -> Result<(Vec<PathResult>, SummaryStats)> {
    let economy = config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))?;
    let results: Vec<PathResult> = pool.install(|| {
        (0..config.n_paths)
            .into_par_iter()
            .map(|i| run_path(config, &economy, i))
            .collect::<riskflow_core::Result<_>>()
    })?;
    log::info!("ran {} paths on {threads} threads", results.len());
    let summary = summarize(&results);
    Ok((results, summary))
}
