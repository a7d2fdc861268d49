//! Heat-bath Monte Carlo with an incrementally maintained field cache.

mod cache;
mod intervals;
mod run;
mod sweep;

pub use cache::FieldCache;
pub use intervals::{interval_histogram, interval_length_stats, IntervalHistogram};
pub use run::{
    batch_means_se, run, run_from, run_replica, Channel, InitialState, Record, ReplicaResult, RunOutput, RunSpec,
    CACHE_TOLERANCE, DEFAULT_RESYNC_EVERY,
};
pub use sweep::{heat_bath_sweep, sweep_with, SweepStats};
