use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use proptest::prelude::*;

use sas_transim_core::cases::builtin;
use sas_transim_core::rk4::{fault_on_bootstrap, swing_rhs, IntegratorConfig};
use sas_transim_core::{
    compare, integrate, MachineDynamics, MachineState, ReducedNetwork, SwingRhsParams, SystemModel,
    Trajectory,
};

const W: f64 = 1.7;
const THETA: f64 = FRAC_PI_2;

fn smib_rhs(d: f64) -> SwingRhsParams {
    let net = ReducedNetwork::from_polar(
        DMatrix::from_row_slice(2, 2, &[0.0, W, W, 0.0]),
        DMatrix::from_row_slice(2, 2, &[0.0, THETA, THETA, 0.0]),
    )
    .unwrap();
    SwingRhsParams::new(
        377.0,
        vec![
            MachineDynamics {
                h: 3.0,
                d,
                pm: W * 1.0472f64.sin(),
                e: 1.0,
                infinite: false,
            },
            MachineDynamics {
                h: 1.0,
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

fn kicked_state() -> MachineState {
    MachineState::new(vec![1.1429, 0.0], vec![3.7639, 0.0]).unwrap()
}

fn delta_at_end(rhs: &SwingRhsParams, s0: &MachineState, horizon: f64, dt: f64) -> f64 {
    integrate(rhs, s0, horizon, IntegratorConfig::with_dt(dt))
        .unwrap()
        .last()
        .unwrap()
        .1
        .delta[0]
}

#[test]
fn fourth_order_self_convergence() {
    let rhs = smib_rhs(1.0);
    let s0 = kicked_state();
    let reference = delta_at_end(&rhs, &s0, 1.0, 1e-3 / 16.0);
    let e1 = (delta_at_end(&rhs, &s0, 1.0, 1e-3) - reference).abs();
    let e2 = (delta_at_end(&rhs, &s0, 1.0, 5e-4) - reference).abs();
    let ratio = e1 / e2;
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    assert!((delta_at_end(&rhs, &s0, 1.0, 1e-3) - delta_at_end(&rhs, &s0, 1.0, 5e-4)).abs() < 1e-8);
}

fn energy(rhs: &SwingRhsParams, s: &MachineState) -> f64 {
    let m = rhs.machine(0);
    m.h / rhs.omega0() * s.omega_dev[0].powi(2) - m.pm * s.delta[0] + W * (s.delta[0] - THETA).sin()
}

#[test]
fn undamped_energy_is_conserved() {
    let rhs = smib_rhs(0.0);
    let s0 = kicked_state();
    let tr = integrate(&rhs, &s0, 5.0, IntegratorConfig::default()).unwrap();
    let e0 = energy(&rhs, &s0);
    let scale = e0.abs().max(rhs.machine(0).pm * s0.delta[0].abs()).max(W);
    let drift = tr
        .states
        .iter()
        .map(|s| (energy(&rhs, s) - e0).abs())
        .fold(0.0, f64::max);
    assert!(drift <= 1e-6 * scale, "drift {drift}");
}

#[test]
fn free_motion_is_exact() {
    let net = ReducedNetwork::from_polar(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
    let rhs = SwingRhsParams::new(
        377.0,
        vec![MachineDynamics {
            h: 4.0,
            d: 0.0,
            pm: 0.0,
            e: 1.0,
            infinite: false,
        }],
        net,
    )
    .unwrap();
    let s0 = MachineState::new(vec![0.2], vec![1.5]).unwrap();
    let tr = integrate(&rhs, &s0, 2.0, IntegratorConfig::default()).unwrap();
    for (t, s) in tr.times.iter().zip(&tr.states) {
        assert!((s.delta[0] - (0.2 + 1.5 * t)).abs() < 1e-12);
        assert_eq!(s.omega_dev[0], 1.5);
    }
}

#[test]
fn smib_acceleration_at_the_kicked_state() {
    let (dd, dw) = swing_rhs(&kicked_state(), &smib_rhs(1.0));
    assert_eq!(dd[0], 3.7639);
    assert!((dw[0] - (-5.287)).abs() / 5.287 < 0.01, "{}", dw[0]);
    assert_eq!((dd[1], dw[1]), (0.0, 0.0));
}

#[test]
fn antisymmetric_pair_accelerates_oppositely() {
    let net = ReducedNetwork::from_polar(
        DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]),
        DMatrix::from_row_slice(2, 2, &[0.0, FRAC_PI_2, FRAC_PI_2, 0.0]),
    )
    .unwrap();
    let m = MachineDynamics {
        h: 5.0,
        d: 0.0,
        pm: 0.0,
        e: 1.1,
        infinite: false,
    };
    let rhs = SwingRhsParams::new(377.0, vec![m, m], net).unwrap();
    let (_, dw) = swing_rhs(&MachineState::at_rest(vec![0.3, -0.3]), &rhs);
    assert!(dw[0] != 0.0);
    assert!((dw[0] + dw[1]).abs() < 1e-12);
}

#[test]
fn horizon_is_hit_exactly() {
    let rhs = smib_rhs(1.0);
    let tr = integrate(&rhs, &kicked_state(), 0.1234, IntegratorConfig::default()).unwrap();
    assert_eq!(tr.times.last().copied(), Some(0.1234));
    assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    assert!(integrate(&rhs, &kicked_state(), 0.0, IntegratorConfig::default()).is_err());
}

#[test]
fn sparse_recording_keeps_the_final_state() {
    let rhs = smib_rhs(1.0);
    let dense = integrate(&rhs, &kicked_state(), 0.5, IntegratorConfig::default()).unwrap();
    let cfg = IntegratorConfig {
        record_every: 100,
        ..IntegratorConfig::default()
    };
    let sparse = integrate(&rhs, &kicked_state(), 0.5, cfg).unwrap();
    assert_eq!(sparse.len(), 6);
    assert_eq!(sparse.last().unwrap().1, dense.last().unwrap().1);
}

#[test]
fn unstable_motion_runs_on() {
    let rhs = smib_rhs(0.0);
    let s0 = MachineState::new(vec![1.1429, 0.0], vec![12.0, 0.0]).unwrap();
    let tr = integrate(&rhs, &s0, 3.0, IntegratorConfig::default()).unwrap();
    assert!(tr.last().unwrap().1.delta[0] > 10.0);
}

#[test]
fn identical_trajectories_compare_to_zero() {
    let m = SystemModel::build(builtin("ieee9").unwrap()).unwrap();
    let mut s = m.equilibrium();
    s.omega_dev[1] = 1.0;
    let tr = integrate(&m.post, &s, 1.0, IntegratorConfig::default()).unwrap();
    let rep = compare(&tr, &tr, Some(0)).unwrap();
    assert_eq!(rep.max_abs(), 0.0);
    assert!(rep.machines.iter().all(|e| e.rmse == 0.0));
}

#[test]
fn shifted_copy_reports_the_shift() {
    let rhs = smib_rhs(1.0);
    let tr = integrate(&rhs, &kicked_state(), 1.0, IntegratorConfig::default()).unwrap();
    let max_w = tr
        .states
        .iter()
        .map(|s| s.omega_dev[0].abs())
        .fold(0.0, f64::max);
    let moved = tr.clone().shifted(1e-3);
    let rep = compare(&tr, &moved, None).unwrap();
    let want = max_w * 1e-3;
    assert!(
        (rep.machines[0].max_abs - want).abs() < 0.05 * want,
        "{} vs {want}",
        rep.machines[0].max_abs
    );
}

#[test]
fn disjoint_ranges_do_not_compare() {
    let rhs = smib_rhs(1.0);
    let tr = integrate(&rhs, &kicked_state(), 0.5, IntegratorConfig::default()).unwrap();
    let far = tr.clone().shifted(10.0);
    assert!(compare(&tr, &far, None).is_err());
    let mut other = Trajectory::new(tr.source);
    other.push(0.0, MachineState::at_rest(vec![0.0]));
    assert!(compare(&tr, &other, None).is_err());
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let m = SystemModel::build(builtin("ieee39").unwrap()).unwrap();
    let eq = m.equilibrium();
    let (_, dw) = swing_rhs(&eq, &m.pre);
    assert!(dw.iter().all(|a| a.abs() < 1e-6));
    let tr = integrate(&m.pre, &eq, 1.0, IntegratorConfig::default()).unwrap();
    let end = tr.last().unwrap().1;
    for i in 0..m.k() {
        assert!((end.delta[i] - eq.delta[i]).abs() < 1e-6);
        assert!(end.omega_dev[i].abs() < 1e-6);
    }
}

#[test]
fn zero_length_fault_returns_the_equilibrium() {
    let mut case = builtin("ieee9").unwrap();
    case.events.t_clear = case.events.t_fault;
    let m = SystemModel::build(case).unwrap();
    let (s, _) = fault_on_bootstrap(&m, IntegratorConfig::default()).unwrap();
    assert_eq!(s, m.equilibrium());
}

#[test]
fn fault_on_bootstrap_ends_at_clearing() {
    let m = SystemModel::build(builtin("ieee39").unwrap()).unwrap();
    let (s, tr) = fault_on_bootstrap(&m, IntegratorConfig::default()).unwrap();
    let (t, last) = tr.last().unwrap();
    assert!((t - m.case.events.t_clear).abs() < 1e-12);
    assert_eq!(last, &s);
    assert!(s.omega_dev.iter().any(|w| w.abs() > 0.1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn uniform_angle_shift_leaves_relative_angles(shift in -3.0f64..3.0, kick in -2.0f64..2.0) {
        let m = SystemModel::build(builtin("ieee9").unwrap()).unwrap();
        let mut s = m.equilibrium();
        s.omega_dev[2] = kick;
        let mut moved = s.clone();
        moved.delta.iter_mut().for_each(|d| *d += shift);
        let cfg = IntegratorConfig { record_every: 50, ..IntegratorConfig::default() };
        let a = integrate(&m.post, &s, 1.0, cfg).unwrap();
        let b = integrate(&m.post, &moved, 1.0, cfg).unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            for i in 1..m.k() {
                let (ra, rb) = (sa.delta[i] - sa.delta[0], sb.delta[i] - sb.delta[0]);
                prop_assert!((ra - rb).abs() < 1e-12, "{}", (ra - rb).abs());
            }
        }
    }
}
