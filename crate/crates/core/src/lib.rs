//! Transient-stability simulation of multi-machine power systems with the
//! multistage modified Adomian decomposition method.
//!
//! The pipeline: parse a [`PowerSystemCase`], build its [`SystemModel`]
//! (Kron-reduced networks for each topology epoch), bootstrap the fault-on
//! period with [`rk4::fault_on_bootstrap`], then chain semi-analytic windows
//! with [`mmadm::simulate_sas`] or integrate with [`rk4::integrate`].

pub mod adm;
pub mod cases;
pub mod error;
pub mod mmadm;
pub mod netmodel;
pub mod pipeline;
pub mod ra;
pub mod rk4;
pub mod series;
pub mod swing;
pub mod trajectory;

pub use adm::{derive_window, eval_window, SasWindow, SeriesOrder};
pub use error::{Error, Result};
pub use mmadm::{simulate_sas, HandoffMode, SasRun, WindowConfig};
pub use netmodel::{parse_case, PowerSystemCase, ReducedNetwork, SystemModel};
pub use pipeline::{run_case, CaseRun, Engine};
pub use ra::{estimate_hmin, estimate_ra, mode_periods, RaInputs, RaResult, RootStatus};
pub use rk4::{compare, integrate, ErrorReport, IntegratorConfig};
pub use series::TruncatedSeries;
pub use swing::{MachineDynamics, SwingRhsParams};
pub use trajectory::{MachineState, Source, Trajectory};
