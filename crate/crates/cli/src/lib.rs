//! Command-line front end for line space clustering: single runs, scoring,
//! benchmark suites and SVG plots.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 runtime failure
//! (including any failed benchmark run).

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod run;

pub use error::{CliError, CliResult};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "LSC_THREADS";

/// Worker pool sized by `LSC_THREADS` (all cores when unset).
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}
