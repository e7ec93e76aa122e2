//! Network data model: case parsing, Y-bus assembly, Kron reduction and
//! classical-machine initialization.

mod case;
mod init;
mod reduce;
mod ybus;

pub use case::{
    parse_case, BranchRef, BranchSpec, BusSpec, EventScript, GeneratorParams, InitialDeviation,
    PowerSystemCase,
};
pub use init::{init_from_powerflow, Machine, SystemModel};
pub use reduce::{
    augment, augment_and_reduce, kron_reduce, reduce_keeping, KronError, ReducedNetwork,
};
pub use ybus::{build_ybus, load_admittance, BusAdmittance, Epoch, FAULT_ADMITTANCE};
