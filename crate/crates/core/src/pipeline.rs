//! Whole-case runs: fault-on bootstrap followed by the post-disturbance
//! simulation with either engine.

use crate::error::Result;
use crate::mmadm::{simulate_sas, WindowConfig};
use crate::netmodel::SystemModel;
use crate::ra::system_ra;
use crate::rk4::{fault_on_bootstrap, integrate, IntegratorConfig};
use crate::trajectory::{MachineState, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    Sas(WindowConfig),
    Rk4,
}

#[derive(Debug, Clone)]
pub struct CaseRun {
    /// Start of the post-disturbance simulation, absolute s.
    pub t_start: f64,
    pub start_state: MachineState,
    /// Post-disturbance samples in absolute time.
    pub post: Trajectory,
    /// Fault-on samples followed by `post`.
    pub full: Trajectory,
    pub windows: usize,
    pub adaptive_cuts: usize,
}

/// Absolute time at which the post-disturbance network takes over.
pub fn post_start(model: &SystemModel) -> f64 {
    let ev = &model.case.events;
    if ev.fault_bus.is_some() && ev.fault_duration() > 0.0 {
        ev.t_clear
    } else {
        ev.t_fault
    }
}

/// State handed to the post-disturbance engine.
pub fn start_state(model: &SystemModel, rk: IntegratorConfig) -> Result<MachineState> {
    Ok(fault_on_bootstrap(model, rk)?.0)
}

/// `0.8` times the system `R_A` at the post-disturbance start state.
pub fn default_window(model: &SystemModel, state: &MachineState, i_loa_max: f64) -> Result<f64> {
    Ok(0.8 * system_ra(&model.post, state, model.reference, i_loa_max)?)
}

/// Runs the case for `horizon` seconds after the disturbance.
pub fn run_case(
    model: &SystemModel,
    engine: &Engine,
    horizon: f64,
    rk: IntegratorConfig,
) -> Result<CaseRun> {
    let (state, fault_on) = fault_on_bootstrap(model, rk)?;
    let t_start = post_start(model);
    let (post, windows, cuts) = match engine {
        Engine::Rk4 => (integrate(&model.post, &state, horizon, rk)?, 0, 0),
        Engine::Sas(cfg) => {
            let run = simulate_sas(&model.post, &state, horizon, cfg)?;
            (run.trajectory, run.windows, run.adaptive_cuts)
        }
    };
    let ids = model.ids();
    let post = post.shifted(t_start).with_ids(ids.clone());
    let mut full = fault_on.with_ids(ids);
    full.source = post.source;
    full.append(post.clone());
    Ok(CaseRun {
        t_start,
        start_state: state,
        post,
        full,
        windows,
        adaptive_cuts: cuts,
    })
}
