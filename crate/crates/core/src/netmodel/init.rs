//! Classical-model initialization from a solved power flow, and the
//! per-epoch swing models of a case.

use num_complex::Complex64;

use super::case::PowerSystemCase;
use super::reduce::augment_and_reduce;
use super::ybus::{build_ybus, Epoch};
use crate::error::{Error, Result};
use crate::swing::{MachineDynamics, SwingRhsParams};
use crate::trajectory::MachineState;

/// A generator with its EMF, equilibrium angle and mechanical power resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Machine {
    pub id: i64,
    pub bus: i64,
    pub h: f64,
    pub d: f64,
    pub xdp: f64,
    pub e: f64,
    pub delta0: f64,
    pub pm: f64,
    pub infinite: bool,
}

impl Machine {
    pub fn dynamics(&self) -> MachineDynamics {
        MachineDynamics {
            h: self.h,
            d: self.d,
            pm: self.pm,
            e: self.e,
            infinite: self.infinite,
        }
    }
}

fn bus_phasor(case: &PowerSystemCase, bus: i64) -> Result<Complex64> {
    let b = case
        .bus(bus)
        .ok_or_else(|| Error::Validation(format!("unknown bus {bus}")))?;
    match (b.voltage_mag, b.voltage_ang) {
        (Some(v), Some(a)) if v > 0.0 => Ok(Complex64::from_polar(v, a)),
        _ => Err(Error::MissingPowerFlow(format!(
            "bus {bus} needs voltage_mag and voltage_ang from a solved power flow"
        ))),
    }
}

/// Fills `E`, `delta0` and `Pm` of every generator.
///
/// Explicit values in the case win. Otherwise `E∠δ0 = V + j·xdp·I` with `I`
/// the generator's current injection `(Ybus·V)` at its terminal, and `Pm`
/// the electrical power at `δ0` on the pre-fault reduced network.
pub fn init_from_powerflow(case: &PowerSystemCase) -> Result<Vec<Machine>> {
    let pre = build_ybus(case, Epoch::PreFault)?;
    let mut injections: Option<Vec<Complex64>> = None;
    let mut machines = Vec::with_capacity(case.generators.len());

    for g in &case.generators {
        let (e, delta0) = match (g.e, g.delta0) {
            (Some(e), Some(d)) => (e, d),
            _ => {
                let sharing = case.generators.iter().filter(|o| o.bus == g.bus).count();
                if sharing > 1 {
                    return Err(Error::Validation(format!(
                        "generators sharing bus {} need explicit e and delta0",
                        g.bus
                    )));
                }
                if injections.is_none() {
                    let v = case
                        .buses
                        .iter()
                        .map(|b| bus_phasor(case, b.id))
                        .collect::<Result<Vec<_>>>()?;
                    let vv = nalgebra::DVector::from_vec(v);
                    injections = Some((&pre.matrix * vv).iter().copied().collect());
                }
                let k = pre.index_of(g.bus).expect("validated bus");
                let i = injections.as_ref().expect("just computed")[k];
                let v = bus_phasor(case, g.bus)?;
                let emf = v + Complex64::new(0.0, g.xdp) * i;
                (g.e.unwrap_or(emf.norm()), g.delta0.unwrap_or(emf.arg()))
            }
        };
        machines.push(Machine {
            id: g.id(),
            bus: g.bus,
            h: g.h.unwrap_or(0.0),
            d: g.d,
            xdp: g.xdp,
            e,
            delta0,
            pm: g.pm.unwrap_or(f64::NAN),
            infinite: g.infinite,
        });
    }

    let net = augment_and_reduce(&pre, &case.generators)?;
    let probe: Vec<MachineDynamics> = machines
        .iter()
        .map(|m| MachineDynamics {
            pm: 0.0,
            ..m.dynamics()
        })
        .collect();
    let rhs = SwingRhsParams::new(case.omega0, probe, net)?;
    let delta0: Vec<f64> = machines.iter().map(|m| m.delta0).collect();
    let pe = rhs.electrical_power(&delta0);
    for (m, p) in machines.iter_mut().zip(pe) {
        if m.pm.is_nan() {
            m.pm = p;
        }
    }
    Ok(machines)
}

/// A case with machines initialized and swing models built for every epoch.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub case: PowerSystemCase,
    pub machines: Vec<Machine>,
    pub pre: SwingRhsParams,
    pub fault_on: SwingRhsParams,
    pub post: SwingRhsParams,
    /// Reference machine index.
    pub reference: usize,
}

impl SystemModel {
    pub fn build(case: PowerSystemCase) -> Result<Self> {
        let machines = init_from_powerflow(&case)?;
        let dynamics: Vec<MachineDynamics> = machines.iter().map(Machine::dynamics).collect();
        let rhs_for = |epoch| -> Result<SwingRhsParams> {
            let y = build_ybus(&case, epoch)?;
            let net = augment_and_reduce(&y, &case.generators)?;
            SwingRhsParams::new(case.omega0, dynamics.clone(), net)
        };
        let pre = rhs_for(Epoch::PreFault)?;
        let fault_on = if case.events.fault_bus.is_some() {
            rhs_for(Epoch::FaultOn)?
        } else {
            pre.clone()
        };
        let post = rhs_for(Epoch::PostFault)?;
        let reference = case.reference_index();
        Ok(Self {
            case,
            machines,
            pre,
            fault_on,
            post,
            reference,
        })
    }

    pub fn k(&self) -> usize {
        self.machines.len()
    }

    /// Generator ids in machine order.
    pub fn ids(&self) -> Vec<i64> {
        self.machines.iter().map(|m| m.id).collect()
    }

    pub fn machine_index(&self, id: i64) -> Option<usize> {
        self.machines.iter().position(|m| m.id == id)
    }

    /// Pre-fault equilibrium at rest.
    pub fn equilibrium(&self) -> MachineState {
        MachineState::at_rest(self.machines.iter().map(|m| m.delta0).collect())
    }

    /// Equilibrium plus the case's scripted initial deviations.
    pub fn initial_state(&self) -> MachineState {
        let mut s = self.equilibrium();
        for dev in &self.case.events.initial_deviation {
            if let Some(k) = self.machine_index(dev.generator) {
                s.delta[k] += dev.delta;
                s.omega_dev[k] += dev.omega;
            }
        }
        s
    }

    /// `max |Pm - Pe(δ0)|` over machines of finite inertia.
    pub fn equilibrium_residual(&self) -> f64 {
        let pe = self.pre.electrical_power(&self.equilibrium().delta);
        self.machines
            .iter()
            .zip(pe)
            .filter(|(m, _)| !m.infinite)
            .map(|(m, p)| (m.pm - p).abs())
            .fold(0.0, f64::max)
    }

    /// Rebuilds the model with one generator's inertia replaced.
    pub fn with_inertia(&self, generator: i64, h: f64) -> Result<Self> {
        let mut case = self.case.clone();
        case.set_inertia(generator, h)?;
        Self::build(case)
    }
}
