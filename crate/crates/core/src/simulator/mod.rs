//! Stochastic forced swing-equation simulator.
//!
//! Classical generator model with additive load noise in the speed equation,
//! integrated by Euler–Maruyama and decimated to a PMU-like output rate.

mod forcing;
mod integrate;
mod model;
mod modes;
pub mod systems;

pub use forcing::{forcing_value, ForcingSpec, FrequencySwitch, Waveform};
pub use integrate::{
    bind_forcings, noise_increment, simulate, step, BoundForcing, ConductanceDrift, SimState, SimulationOptions,
    DIVERGENCE_LIMIT, MAX_STEP,
};
pub use model::{
    electrical_power, power_jacobian, solve_equilibrium, solve_equilibrium_from, GridModel, GridModelParams,
    EQUILIBRIUM_MAX_ITER, EQUILIBRIUM_TOLERANCE,
};
pub use modes::{natural_modes, state_matrix, NaturalMode};
