use nalgebra::DMatrix;
use num_complex::Complex64;

use super::case::PowerSystemCase;
use crate::error::{Error, Result};

/// Shunt admittance (pu) that models a bolted three-phase fault at a bus.
pub const FAULT_ADMITTANCE: f64 = 1e6;

/// Topology epoch of a disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Epoch {
    PreFault,
    FaultOn,
    PostFault,
}

/// Bus admittance matrix indexed in case bus order.
#[derive(Debug, Clone, PartialEq)]
pub struct BusAdmittance {
    pub bus_ids: Vec<i64>,
    pub matrix: DMatrix<Complex64>,
}

impl BusAdmittance {
    pub fn index_of(&self, bus: i64) -> Option<usize> {
        self.bus_ids.iter().position(|&b| b == bus)
    }
}

/// Constant-impedance load admittance `(P - jQ) / |V|^2`.
pub fn load_admittance(p: f64, q: f64, v: f64) -> Complex64 {
    Complex64::new(p, -q) / (v * v)
}

pub fn build_ybus(case: &PowerSystemCase, epoch: Epoch) -> Result<BusAdmittance> {
    let n = case.buses.len();
    let index = case.bus_index_map();
    let tripped = case.tripped_branches()?;
    let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));

    for (k, br) in case.branches.iter().enumerate() {
        if !br.in_service || (epoch == Epoch::PostFault && tripped.contains(&k)) {
            continue;
        }
        let f = index[&br.from_bus];
        let t = index[&br.to_bus];
        let ys = Complex64::new(br.r, br.x).inv();
        let ysh = Complex64::new(0.0, br.b_shunt / 2.0);
        let tap = br.tap;
        y[(f, f)] += (ys + ysh) / (tap * tap);
        y[(t, t)] += ys + ysh;
        y[(f, t)] -= ys / tap;
        y[(t, f)] -= ys / tap;
    }

    for (k, bus) in case.buses.iter().enumerate() {
        if bus.has_load() {
            let v = bus.voltage_mag.ok_or_else(|| {
                Error::MissingPowerFlow(format!(
                    "bus {} carries load but has no voltage_mag",
                    bus.id
                ))
            })?;
            y[(k, k)] += load_admittance(bus.p_load, bus.q_load, v);
        }
    }

    if epoch == Epoch::FaultOn {
        if let Some(fb) = case.events.fault_bus {
            let k = index[&fb];
            y[(k, k)] += Complex64::new(FAULT_ADMITTANCE, 0.0);
        }
    }

    Ok(BusAdmittance {
        bus_ids: case.buses.iter().map(|b| b.id).collect(),
        matrix: y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::parse_case;

    fn two_bus(extra: &str) -> PowerSystemCase {
        parse_case(&format!(
            r#"{{
            "base_mva": 100, "frequency_hz": 60,
            "buses": [{{"id": 1, "voltage_mag": 1.0, "voltage_ang": 0.0}}, {{"id": 2, "voltage_mag": 1.0}}],
            "branches": [{{"from_bus": 1, "to_bus": 2, "x": 0.5}}],
            "generators": [{{"bus": 1, "h": 3.0, "xdp": 0.2, "e": 1.0, "delta0": 0.1}}]
            {extra}
        }}"#
        ))
        .unwrap()
    }

    #[test]
    fn single_branch_off_diagonal() {
        let y = build_ybus(&two_bus(""), Epoch::PreFault).unwrap();
        let off = y.matrix[(0, 1)];
        assert!((off - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((y.matrix[(0, 0)] - Complex64::new(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn fault_shunt_dominates_faulted_bus() {
        let case = two_bus(r#", "events": {"fault_bus": 1, "t_clear": 0.1}"#);
        let pre = build_ybus(&case, Epoch::PreFault).unwrap();
        let on = build_ybus(&case, Epoch::FaultOn).unwrap();
        assert!((on.matrix[(0, 0)].norm() - FAULT_ADMITTANCE).abs() < 10.0);
        let diff = &on.matrix - &pre.matrix;
        for (k, v) in diff.iter().enumerate() {
            if k == 0 {
                assert_eq!(v.re, FAULT_ADMITTANCE);
            } else {
                assert_eq!(v.norm(), 0.0);
            }
        }
    }

    #[test]
    fn load_folded_as_shunt() {
        let text = r#"{
            "base_mva": 100, "frequency_hz": 60,
            "buses": [{"id": 1, "voltage_mag": 1.0, "voltage_ang": 0.0},
                      {"id": 2, "voltage_mag": 0.9, "p_load": 0.81, "q_load": 0.405}],
            "branches": [{"from_bus": 1, "to_bus": 2, "x": 0.5}],
            "generators": [{"bus": 1, "h": 3.0, "xdp": 0.2}]
        }"#;
        let y = build_ybus(&parse_case(text).unwrap(), Epoch::PreFault).unwrap();
        let shunt = y.matrix[(1, 1)] - Complex64::new(0.0, -2.0);
        assert!((shunt - Complex64::new(1.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn missing_voltage_under_load_is_reported() {
        let text = r#"{
            "base_mva": 100, "frequency_hz": 60,
            "buses": [{"id": 1}, {"id": 2, "p_load": 1.0}],
            "branches": [{"from_bus": 1, "to_bus": 2, "x": 0.5}],
            "generators": [{"bus": 1, "h": 3.0, "xdp": 0.2}]
        }"#;
        let err = build_ybus(&parse_case(text).unwrap(), Epoch::PreFault).unwrap_err();
        assert!(matches!(err, Error::MissingPowerFlow(_)));
    }
}
