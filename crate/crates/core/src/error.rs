use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("case parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("invalid case: {0}")]
    Validation(String),

    #[error("missing power-flow data: {0}; supply a case with solved bus voltages")]
    MissingPowerFlow(String),

    #[error("network island not connected to any kept node: buses {buses:?}")]
    Island { buses: Vec<i64> },

    #[error("singular matrix while eliminating network nodes")]
    Singular,

    #[error("numerical overflow in series term {order} of machine {machine}")]
    NumericalOverflow { machine: usize, order: usize },

    #[error("Adomian order {requested} requested but only {available} lambda orders are stored")]
    OrderOutOfRange { requested: usize, available: usize },

    #[error("local time {t} outside window [0, {span}]")]
    OutOfWindow { t: f64, span: f64 },

    #[error(
        "series solution diverged at t = {time} s (machine {machine}): window shrank below {min_window} s; \
         raise the term count or lower the window length"
    )]
    Divergence {
        time: f64,
        machine: usize,
        min_window: f64,
    },

    #[error("integration produced a non-finite state at t = {time} s")]
    NonFinite { time: f64 },

    #[error("unstable equilibrium: eigenvalue {eigenvalue} of the linearized system is negative")]
    UnstableEquilibrium { eigenvalue: f64 },

    #[error("not an equilibrium: max |acceleration| = {residual} rad/s^2")]
    NotEquilibrium { residual: f64 },

    #[error("target R_A = {target} s is unreachable with inertia up to {h_max} s")]
    TargetUnreachable { target: f64, h_max: f64 },

    #[error("trajectory mismatch: {0}")]
    Trajectory(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Numerical failures are separated from input errors for exit-code purposes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular
                | Error::NumericalOverflow { .. }
                | Error::Divergence { .. }
                | Error::NonFinite { .. }
                | Error::UnstableEquilibrium { .. }
                | Error::NotEquilibrium { .. }
                | Error::TargetUnreachable { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
