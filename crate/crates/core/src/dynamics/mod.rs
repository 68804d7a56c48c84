//! Master-equation and quantum-trajectory time evolution.

mod dopri;
mod initial;
mod master;
mod trajectories;

pub use dopri::{integrate, IntegrationStats, IntegratorOptions};
pub use initial::{haar_random_state, random_pure_state, RANDOM_STATE_MAX_DIM};
pub use master::{evolve_master, evolve_master_with, pure_density, DensityTrajectory, TimeGrid, MAX_STORED_ENTRIES};
pub use trajectories::{
    ensemble_average, evolve_trajectories, evolve_trajectories_observed, mean_and_stderr, EnsembleSeries,
    ObservedEnsemble, TrajectoryEnsemble, TrajectoryOptions, MAX_STORED_AMPLITUDES,
};
