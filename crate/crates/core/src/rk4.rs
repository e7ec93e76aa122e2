//! Fixed-step fourth-order Runge–Kutta reference integrator, fault-on
//! bootstrap and trajectory comparison.

use crate::error::{Error, Result};
use crate::netmodel::SystemModel;
use crate::swing::SwingRhsParams;
use crate::trajectory::{MachineState, Source, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Step, s.
    pub dt: f64,
    /// Steps between stored samples; the final state is always stored.
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            record_every: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }
}

/// `(dδ/dt, dΔω/dt)` of the damped swing equations.
pub fn swing_rhs(state: &MachineState, rhs: &SwingRhsParams) -> (Vec<f64>, Vec<f64>) {
    let mut acc = vec![0.0; rhs.k()];
    accel(rhs, &state.delta, &state.omega_dev, &mut acc);
    (state.omega_dev.clone(), acc)
}

fn accel(rhs: &SwingRhsParams, delta: &[f64], omega: &[f64], out: &mut [f64]) {
    rhs.acceleration_into(delta, out);
    for (i, o) in out.iter_mut().enumerate() {
        *o -= rhs.damping_coeff(i) * omega[i];
    }
}

/// Scratch buffers for one integration.
struct Stepper {
    k: usize,
    kd: [Vec<f64>; 4],
    kw: [Vec<f64>; 4],
    d_tmp: Vec<f64>,
    w_tmp: Vec<f64>,
}

impl Stepper {
    fn new(k: usize) -> Self {
        let z = || vec![0.0; k];
        Self {
            k,
            kd: [z(), z(), z(), z()],
            kw: [z(), z(), z(), z()],
            d_tmp: z(),
            w_tmp: z(),
        }
    }

    fn step(&mut self, rhs: &SwingRhsParams, delta: &mut [f64], omega: &mut [f64], h: f64) {
        let k = self.k;
        let fracs = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            if s == 0 {
                self.d_tmp.copy_from_slice(delta);
                self.w_tmp.copy_from_slice(omega);
            } else {
                let c = fracs[s] * h;
                for i in 0..k {
                    self.d_tmp[i] = delta[i] + c * self.kd[s - 1][i];
                    self.w_tmp[i] = omega[i] + c * self.kw[s - 1][i];
                }
            }
            self.kd[s].copy_from_slice(&self.w_tmp);
            let (d_tmp, w_tmp) = (&self.d_tmp, &self.w_tmp);
            accel(rhs, d_tmp, w_tmp, &mut self.kw[s]);
        }
        let h6 = h / 6.0;
        for i in 0..k {
            delta[i] +=
                h6 * (self.kd[0][i] + 2.0 * self.kd[1][i] + 2.0 * self.kd[2][i] + self.kd[3][i]);
            omega[i] +=
                h6 * (self.kw[0][i] + 2.0 * self.kw[1][i] + 2.0 * self.kw[2][i] + self.kw[3][i]);
        }
    }
}

/// Classical RK4 from `state0` over `[0, horizon]`; the last step is
/// shortened to land on `horizon`. Rotor angles are not wrapped.
pub fn integrate(
    rhs: &SwingRhsParams,
    state0: &MachineState,
    horizon: f64,
    cfg: IntegratorConfig,
) -> Result<Trajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) || cfg.record_every == 0 {
        return Err(Error::InvalidArgument(
            "step must be positive and record_every at least 1".into(),
        ));
    }
    if state0.k() != rhs.k() {
        return Err(Error::InvalidArgument(format!(
            "state has {} machines, model has {}",
            state0.k(),
            rhs.k()
        )));
    }
    let mut traj = Trajectory::new(Source::Rk4);
    traj.push(0.0, state0.clone());
    let mut delta = state0.delta.clone();
    let mut omega = state0.omega_dev.clone();
    let mut stepper = Stepper::new(rhs.k());
    let steps = ((horizon / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    for n in 1..=steps {
        let t_prev = (n - 1) as f64 * cfg.dt;
        let (t, h) = if n == steps {
            (horizon, horizon - t_prev)
        } else {
            (n as f64 * cfg.dt, cfg.dt)
        };
        stepper.step(rhs, &mut delta, &mut omega, h);
        if delta.iter().chain(&omega).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        if n % cfg.record_every == 0 || n == steps {
            traj.push(
                t,
                MachineState {
                    delta: delta.clone(),
                    omega_dev: omega.clone(),
                },
            );
        }
    }
    Ok(traj)
}

/// Integrates the fault-on network from the case's initial state over the
/// fault duration. Returns the clearing-instant state and the fault-on
/// trajectory stamped in absolute time.
pub fn fault_on_bootstrap(
    model: &SystemModel,
    cfg: IntegratorConfig,
) -> Result<(MachineState, Trajectory)> {
    let ev = &model.case.events;
    let state0 = model.initial_state();
    let duration = ev.fault_duration();
    if ev.fault_bus.is_none() || duration <= 0.0 {
        let mut t = Trajectory::new(Source::Rk4);
        t.push(ev.t_fault, state0.clone());
        return Ok((state0, t));
    }
    let traj = integrate(&model.fault_on, &state0, duration, cfg)?.shifted(ev.t_fault);
    let end = traj.states.last().expect("non-empty").clone();
    Ok((end, traj))
}

/// Error statistics for one machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineError {
    pub max_abs: f64,
    pub rmse: f64,
    pub t_at_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Per machine, in trajectory order. The reference machine reports zeros.
    pub machines: Vec<MachineError>,
    pub reference: Option<usize>,
    pub samples: usize,
}

impl ErrorReport {
    /// Largest error over all machines.
    pub fn max_abs(&self) -> f64 {
        self.machines.iter().map(|m| m.max_abs).fold(0.0, f64::max)
    }
}

/// Cubic Hermite interpolation of `traj`'s angles at `t`, using `Δω` as the
/// slope. `t` must lie within the trajectory's time range.
pub fn interpolate_delta(traj: &Trajectory, t: f64) -> Vec<f64> {
    let ts = &traj.times;
    let idx = match ts.binary_search_by(|x| x.partial_cmp(&t).expect("finite times")) {
        Ok(i) => return traj.states[i].delta.clone(),
        Err(i) => i.clamp(1, ts.len() - 1),
    };
    let (t0, t1) = (ts[idx - 1], ts[idx]);
    let (a, b) = (&traj.states[idx - 1], &traj.states[idx]);
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    (0..a.k())
        .map(|i| {
            h00 * a.delta[i]
                + h10 * h * a.omega_dev[i]
                + h01 * b.delta[i]
                + h11 * h * b.omega_dev[i]
        })
        .collect()
}

/// Resamples `b` at the times of `a` that fall inside `b`'s range and
/// reports per-machine angle errors, relative to `reference` when given.
pub fn compare(a: &Trajectory, b: &Trajectory, reference: Option<usize>) -> Result<ErrorReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Trajectory("empty trajectory".into()));
    }
    let k = a.k();
    if b.k() != k {
        return Err(Error::Trajectory(format!(
            "{} machines versus {}",
            k,
            b.k()
        )));
    }
    if !a.ids.is_empty() && !b.ids.is_empty() && a.ids != b.ids {
        return Err(Error::Trajectory(format!(
            "machine ids {:?} versus {:?}",
            a.ids, b.ids
        )));
    }
    if let Some(r) = reference {
        if r >= k {
            return Err(Error::Trajectory(format!(
                "reference machine {} out of range",
                r + 1
            )));
        }
    }
    let (lo, hi) = (b.times[0], *b.times.last().expect("non-empty"));
    let tol = 1e-9 * hi.abs().max(1.0);
    let mut stats = vec![(0.0f64, 0.0f64, a.times[0]); k];
    let mut samples = 0usize;
    for (t, sa) in a.times.iter().zip(&a.states) {
        if *t < lo - tol || *t > hi + tol {
            continue;
        }
        let db = interpolate_delta(b, t.clamp(lo, hi));
        samples += 1;
        for i in 0..k {
            let e = match reference {
                Some(r) => (sa.delta[i] - sa.delta[r]) - (db[i] - db[r]),
                None => sa.delta[i] - db[i],
            }
            .abs();
            let st = &mut stats[i];
            if e > st.0 {
                st.0 = e;
                st.2 = *t;
            }
            st.1 += e * e;
        }
    }
    if samples == 0 {
        return Err(Error::Trajectory("time ranges do not overlap".into()));
    }
    Ok(ErrorReport {
        machines: stats
            .into_iter()
            .map(|(max_abs, sq, t_at_max)| MachineError {
                max_abs,
                rmse: (sq / samples as f64).sqrt(),
                t_at_max,
            })
            .collect(),
        reference,
        samples,
    })
}
