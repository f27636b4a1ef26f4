//! Scaling dynamics and CBOD-driven evolution.

mod ermakov;
mod evolve;

pub use ermakov::{scaled_state, solve_ermakov, step_doubling_error, ErmakovSolution, ScalingPoint};
pub use evolve::{
    cbod_hamiltonian, default_steps, dynamic_fidelity, evolve_cbod, evolve_cbod_with, evolve_mode_scaling,
    propagate_gaussian, CbodPicture, EvolutionMethod, EvolutionResult, EvolutionSettings, ModeDiagnostics,
    ModeScaling, QuadraticHamiltonian, MIN_STEPS, STEPS_PER_UNIT_TIME,
};
