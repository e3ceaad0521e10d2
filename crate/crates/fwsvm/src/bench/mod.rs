//! Benchmarking support: ground-truth oracle, synthetic data and the
//! experiment harness.

pub mod experiment;
pub mod oracle;
pub mod synth;

pub use experiment::{
    grid_search_cv, run_experiment, sv_overlap, sweep_c, BenchAlgo, BenchError, DataSource,
    ExperimentConfig, ExperimentReport, KernelChoice,
};
pub use oracle::{oracle_solve, oracle_solve_matrix, oracle_solve_weighted_matrix};
pub use synth::gaussian_blobs;
