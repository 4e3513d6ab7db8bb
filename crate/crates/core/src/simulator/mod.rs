//! Monte Carlo oracle for the analytic engine.

pub mod experiments;
pub mod ppp;
pub mod stats;

use std::sync::OnceLock;

pub use experiments::{
    min_window_side, run_access_prob_experiment, run_ase_experiment, run_ase_sweep, run_primary_outage_experiment,
    sir_map, snapshots_for, trial_records, AccessExperiment, AccessTable, AseCell, AseSweep, Conditioning, Protocol,
    Scenario, SirMapPoint, TrialRecord,
};
pub use ppp::SensingMode;
pub use stats::Estimate;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "SAP_LAB_THREADS";

/// Shared worker pool, sized by `SAP_LAB_THREADS` when set.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
        rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool")
    })
}
