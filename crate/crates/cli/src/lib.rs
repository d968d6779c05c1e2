//! Benchmark harness for the `circlefit` library: Monte-Carlo campaigns and
//! formula-accuracy sweeps, shared by the `circlefit` binary and the test
//! suites.

pub mod campaign;
pub mod sweep;

pub use campaign::{
    generate_sample, run_campaign, Algorithm, AlgorithmStats, Campaign, CampaignReport,
    Classification, InitMode,
};
pub use sweep::{evaluator_sweep, log_spaced, SweepRow};
