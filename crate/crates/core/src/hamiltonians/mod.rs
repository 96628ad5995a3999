//! Annealing schedules, system Hamiltonians and tracked eigensystems.

mod ising;
mod schedule;
mod single_qubit;
mod spectrum;

pub use ising::{partition_ground_states, quantum_signature_instance, GroundPartition, IsingInstance};
pub use schedule::{beta_schedule, beta_schedule_derivative, Schedule};
pub use single_qubit::SingleQubitModel;
pub use spectrum::{ground_gap, refine_min_gap, spectrum_track, DegeneracyFlag, SpectrumTrack, DEGENERACY_TOL};

pub(crate) use schedule::check_s;
