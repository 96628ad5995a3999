//! Density-matrix evolution, closed-form single-qubit solutions and t_f sweeps.

mod analytic;
mod density;
mod evolve;
mod integrator;
mod sweep;

pub use analytic::{
    analytic_adiabatic_limit, analytic_pure_dephasing, analytic_static_scl, analytic_static_wcl, static_wcl_times,
    AdiabaticLimit, StaticWclTimes,
};
pub use density::DensityMatrix;
pub use evolve::{
    evolve, evolve_single_qubit_scl, evolve_single_qubit_wcl, initial_ground_state, uniform_grid, Dynamics,
    EvolveOptions, Trajectory, MAX_TRACE_DRIFT, MIN_EIGENVALUE_FLOOR,
};
pub use integrator::{Dopri5, IntegrationStats, StepControl};
pub use sweep::{
    gibbs_ground_population, lamb_for, optimal_tf_vs_coupling, sweep_tf, CouplingOptimum, Optimum, SweepOptions,
    SweepResult,
};
