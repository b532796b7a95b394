//! Compressible Euler on the periodic box: state, time stepping and numerical
//! checks of the vorticity and wave-transport structure.

pub mod error;
pub mod evolution;
pub mod fluid_state;
pub mod harmonic;
pub mod inequalities;
pub mod report;
pub mod vorticity;
pub mod wave;

pub use error::{CoreError, Result};
pub use evolution::{simulate, simulate_with, InitialData, SimConfig, SnapshotStack, TimeStep};
pub use fluid_state::{EquationOfState, FluidState};
pub use report::{evaluate_identity, IdentityId, ResidualReport};
