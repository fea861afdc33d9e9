//! Quantum-trajectory estimates of steady-state observables.

mod estimate;
mod trotter;
mod unravel;

pub use estimate::{estimate_ness_observables, write_time_series_csv, Estimate, TimePoint, TrajectoryEstimate};
pub use trotter::{trotter_step, BondGate, TrotterPropagator};
pub use unravel::{run_trajectory, TrajectoryConfig, TrajectoryEngine, TrajectorySeries, MAX_NORM_DROP, MAX_REFINEMENT};
