//! Shared fixtures for the criterion benches.

use sas_transim_core::cases::builtin;
use sas_transim_core::rk4::{fault_on_bootstrap, IntegratorConfig};
use sas_transim_core::{MachineState, Result, SystemModel};

/// The 39-bus model and its post-fault initial state.
pub fn ieee39_post_fault() -> Result<(SystemModel, MachineState)> {
    let model = SystemModel::build(builtin("ieee39")?)?;
    let (state, _) = fault_on_bootstrap(&model, IntegratorConfig::default())?;
    Ok((model, state))
}
