//! Monte Carlo simulation of the controlled surplus process.

mod config;
mod convergence;
mod engine;
mod estimate;
mod path;

pub use config::{horizon_for, SimConfig, DEFAULT_TRUNCATION_TOL};
pub use convergence::{HalvingPlan, HalvingStudy, Increment, LevelResult};
pub use engine::{
    coupled_unit_payoffs, estimate_ruin_moments, simulate_double_barrier, simulate_levels,
    simulate_levels_detailed, simulate_strategy, simulate_upper_barrier, trace_path, trace_to_csv,
    LevelRun, TraceRow, MAX_LEVELS,
};
pub use estimate::{
    compensated_sum, mean_and_stderr, MomentEstimate, RuinMoments, SimEstimate,
    MAX_CENSORED_FRACTION,
};
pub use path::{Control, Flows, PathState};
