//! Time advance of the coupled system (v, h): explicit midpoint advection
//! and surface update, Crank-Nicolson flat-frame viscosity, pressure
//! projection, and the discrete energy ledger.

pub mod checkpoint;
pub mod energy;
pub mod initial;
pub mod state;
pub mod stepper;

use crate::error::Result;
use crate::geometry::div_phi_flux;
use crate::scalar::Real;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use energy::{dissipation_rate, kinetic_energy, potential_energy, EnergyLedger};
pub use initial::{sheared_wave, standing_wave, tangential_stress_sup};
pub use state::FlowState;
pub use stepper::{Stepper, StepperParams};

/// L2 norm of the discrete transformed divergence (1/d_z phi) div(P v).
pub fn divergence_residual<S: Real>(state: &FlowState<S>) -> Result<S> {
    let div = div_phi_flux(&state.v, &state.frame)?;
    Ok(state.grid.l2_norm(&div))
}
