//! Gibbs sampling over partitioning and lifting vectors with ordered
//! overrelaxation, acceptance-rate control of beta and staged annealing.

mod chain;
mod sampling;
mod stages;

pub use chain::{
    build_tuple_list, log_csv, objective_classes, run, AnnealSchedule, Chain, DistanceCaps, LogRecord, OptProblem,
    RunOptions, RunResult, SamplerConfig, DEFAULT_MAX_ASSIGNMENTS,
};
pub use sampling::{conditional_pmf, overrelax_sample, sample_kernel, update_beta, PidGains, PidState};
pub use stages::{
    grid_search_hyperparams, lift_objects, optimize_lift, optimize_lift_protograph, optimize_partition,
    partition_problem, random_cycle4_free, repair_to_feasible, vector_to_grid, LiftCandidates, LiftMode,
    LiftOutcome, LiftStage, OptimizeOptions, PartitionOutcome,
};

#[cfg(test)]
mod tests;
