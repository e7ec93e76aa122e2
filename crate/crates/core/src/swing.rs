//! Classical multi-machine swing model `d2(delta)/dt2 + a d(delta)/dt = f(delta)`.

use crate::error::{Error, Result};
use crate::netmodel::ReducedNetwork;

/// Per-machine constants of the swing equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineDynamics {
    /// Inertia constant, s. Ignored for infinite machines.
    pub h: f64,
    pub d: f64,
    pub pm: f64,
    pub e: f64,
    /// Infinite inertia: the machine keeps its speed forever.
    pub infinite: bool,
}

/// Off-diagonal coupling `E_i E_j Y_ij` split into `cos(theta_ij)` and
/// `sin(theta_ij)` parts, stored once per unordered pair `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Coupling {
    pub i: usize,
    pub j: usize,
    pub wc: f64,
    pub ws: f64,
}

/// Right-hand side data of the swing equations for one network epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct SwingRhsParams {
    omega0: f64,
    machines: Vec<MachineDynamics>,
    network: ReducedNetwork,
    gain: Vec<f64>,
    damping: Vec<f64>,
    net_power: Vec<f64>,
    pairs: Vec<Coupling>,
}

impl SwingRhsParams {
    pub fn new(
        omega0: f64,
        machines: Vec<MachineDynamics>,
        network: ReducedNetwork,
    ) -> Result<Self> {
        let k = machines.len();
        if k == 0 || network.k() != k {
            return Err(Error::InvalidArgument(format!(
                "{k} machines but a {0}x{0} network",
                network.k()
            )));
        }
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::InvalidArgument(
                "synchronous speed must be positive".into(),
            ));
        }
        for (i, m) in machines.iter().enumerate() {
            let ok = m.e > 0.0
                && m.e.is_finite()
                && m.pm.is_finite()
                && m.d >= 0.0
                && m.d.is_finite()
                && (m.infinite || (m.h > 0.0 && m.h.is_finite()));
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "machine {i} has invalid parameters {m:?}"
                )));
            }
        }
        let gain = machines
            .iter()
            .map(|m| {
                if m.infinite {
                    0.0
                } else {
                    omega0 / (2.0 * m.h)
                }
            })
            .collect();
        let damping = machines
            .iter()
            .map(|m| if m.infinite { 0.0 } else { m.d / (2.0 * m.h) })
            .collect();
        let net_power = machines
            .iter()
            .enumerate()
            .map(|(i, m)| m.pm - m.e * m.e * network.conductance(i))
            .collect();
        let mut pairs = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let w = machines[i].e * machines[j].e * network.mag(i, j);
                if w != 0.0 {
                    let (s, c) = network.ang(i, j).sin_cos();
                    pairs.push(Coupling {
                        i,
                        j,
                        wc: w * c,
                        ws: w * s,
                    });
                }
            }
        }
        Ok(Self {
            omega0,
            machines,
            network,
            gain,
            damping,
            net_power,
            pairs,
        })
    }

    pub fn k(&self) -> usize {
        self.machines.len()
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn machines(&self) -> &[MachineDynamics] {
        &self.machines
    }

    pub fn machine(&self, i: usize) -> &MachineDynamics {
        &self.machines[i]
    }

    pub fn network(&self) -> &ReducedNetwork {
        &self.network
    }

    /// `a_i = D_i / (2 H_i)`.
    pub fn damping_coeff(&self, i: usize) -> f64 {
        self.damping[i]
    }

    /// `omega0 / (2 H_i)`, zero for infinite machines.
    pub fn gain(&self, i: usize) -> f64 {
        self.gain[i]
    }

    /// `Pm_i - E_i^2 G_ii`.
    pub(crate) fn net_power(&self, i: usize) -> f64 {
        self.net_power[i]
    }

    pub(crate) fn pairs(&self) -> &[Coupling] {
        &self.pairs
    }

    /// Electrical power `Pe_i = E_i^2 G_ii + sum_j E_i E_j Y_ij cos(delta_i - delta_j - theta_ij)`.
    pub fn electrical_power(&self, delta: &[f64]) -> Vec<f64> {
        let mut pe: Vec<f64> = self
            .machines
            .iter()
            .enumerate()
            .map(|(i, m)| m.pm - self.net_power[i])
            .collect();
        self.add_transfer_power(delta, &mut pe);
        pe
    }

    fn add_transfer_power(&self, delta: &[f64], pe: &mut [f64]) {
        for p in &self.pairs {
            let (s, c) = (delta[p.i] - delta[p.j]).sin_cos();
            pe[p.i] += p.wc * c + p.ws * s;
            pe[p.j] += p.wc * c - p.ws * s;
        }
    }

    /// Undamped acceleration `f_i(delta)`, rad/s^2, written into `out`.
    pub fn acceleration_into(&self, delta: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.net_power) {
            *o = -p;
        }
        self.add_transfer_power(delta, out);
        for (i, o) in out.iter_mut().enumerate() {
            *o *= -self.gain[i];
        }
    }

    pub fn acceleration(&self, delta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.k()];
        self.acceleration_into(delta, &mut out);
        out
    }

    /// Copy with mechanical powers reset so that `delta` is an equilibrium.
    pub fn rebalanced_at(&self, delta: &[f64]) -> Result<Self> {
        let pe = self.electrical_power(delta);
        let machines = self
            .machines
            .iter()
            .zip(pe)
            .map(|(m, p)| MachineDynamics { pm: p, ..*m })
            .collect();
        Self::new(self.omega0, machines, self.network.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use std::f64::consts::FRAC_PI_2;

    fn smib() -> SwingRhsParams {
        let net = ReducedNetwork::from_polar(
            DMatrix::from_row_slice(2, 2, &[1.7, 1.7, 1.7, 1.7]),
            DMatrix::from_row_slice(2, 2, &[-FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2]),
        )
        .unwrap();
        let pm = 1.7 * 1.0472f64.sin();
        SwingRhsParams::new(
            377.0,
            vec![
                MachineDynamics {
                    h: 3.0,
                    d: 1.0,
                    pm,
                    e: 1.0,
                    infinite: false,
                },
                MachineDynamics {
                    h: 0.0,
                    d: 0.0,
                    pm: 0.0,
                    e: 1.0,
                    infinite: true,
                },
            ],
            net,
        )
        .unwrap()
    }

    #[test]
    fn smib_power_is_sine_of_angle() {
        let rhs = smib();
        let pe = rhs.electrical_power(&[1.1429, 0.0]);
        assert!((pe[0] - 1.7 * 1.1429f64.sin()).abs() < 1e-12);
        assert_eq!(rhs.acceleration(&[1.1429, 0.0])[1], 0.0);
    }

    #[test]
    fn rebalancing_makes_an_equilibrium() {
        let rhs = smib().rebalanced_at(&[0.5, 0.0]).unwrap();
        assert!(rhs.acceleration(&[0.5, 0.0])[0].abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_network() {
        let net = ReducedNetwork::from_polar(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
        let m = MachineDynamics {
            h: 1.0,
            d: 0.0,
            pm: 0.0,
            e: 1.0,
            infinite: false,
        };
        assert!(SwingRhsParams::new(377.0, vec![m, m], net).is_err());
    }
}
