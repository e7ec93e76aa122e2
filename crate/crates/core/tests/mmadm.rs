use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

use sas_transim_core::cases::builtin;
use sas_transim_core::mmadm::{handoff_state, i_loa, sample_points};
use sas_transim_core::ra::system_ra;
use sas_transim_core::rk4::{interpolate_delta, IntegratorConfig};
use sas_transim_core::{
    derive_window, eval_window, integrate, simulate_sas, HandoffMode, MachineDynamics,
    MachineState, ReducedNetwork, SeriesOrder, SwingRhsParams, SystemModel, WindowConfig,
};

fn smib() -> SystemModel {
    SystemModel::build(builtin("smib").unwrap()).unwrap()
}

fn free_rhs() -> SwingRhsParams {
    let net = ReducedNetwork::from_polar(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
    SwingRhsParams::new(
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
    .unwrap()
}

#[test]
fn free_motion_is_a_straight_line() {
    let rhs = free_rhs();
    let s0 = MachineState::new(vec![0.4], vec![2.5]).unwrap();
    let w = derive_window(&rhs, &s0, SeriesOrder::new(5)).unwrap();
    assert_eq!(w.sum[0].coeffs()[..2], [0.4, 2.5]);
    assert!(w.sum[0].coeffs()[2..].iter().all(|&c| c == 0.0));
    for t in [0.0, 0.05, 0.3, 1.0] {
        assert_eq!(i_loa(&w, t), 0.0);
    }
    // Both handoff modes agree when δ is linear.
    let w = w.over(0.0, 0.2);
    let a = handoff_state(&w, 0.2, HandoffMode::AnalyticDerivative);
    let b = handoff_state(&w, 0.2, HandoffMode::TwoPoint);
    assert_eq!(a.delta, b.delta);
    assert!((a.omega_dev[0] - b.omega_dev[0]).abs() < 1e-12);
}

#[test]
fn indicator_starts_at_zero() {
    let m = smib();
    for n in 3..8 {
        let w = derive_window(&m.post, &m.initial_state(), SeriesOrder::new(n)).unwrap();
        assert_eq!(i_loa(&w, 0.0), 0.0);
    }
}

#[test]
fn indicator_grows_past_the_accuracy_radius() {
    let m = smib();
    let w = derive_window(&m.post, &m.initial_state(), SeriesOrder::new(5)).unwrap();
    assert!(i_loa(&w, 0.1) * 10.0 < i_loa(&w, 0.3));
    let mut prev = i_loa(&w, 0.2);
    for k in 1..=20 {
        let v = i_loa(&w, 0.2 + 0.01 * k as f64);
        assert!(v > prev);
        prev = v;
    }
}

#[test]
fn two_point_handoff_is_close_to_analytic() {
    let m = smib();
    let w = derive_window(&m.post, &m.initial_state(), SeriesOrder::new(5))
        .unwrap()
        .over(0.0, 0.15);
    let a = handoff_state(&w, 0.15, HandoffMode::AnalyticDerivative);
    let b = handoff_state(&w, 0.15, HandoffMode::TwoPoint);
    assert_eq!(a.delta, b.delta);
    let d = (a.omega_dev[0] - b.omega_dev[0]).abs();
    assert!(d > 0.0 && d < 0.05, "{d}");
}

#[test]
fn eval_window_matches_rk4_early_on() {
    let m = smib();
    let s0 = m.initial_state();
    let w = derive_window(&m.post, &s0, SeriesOrder::new(5))
        .unwrap()
        .over(0.0, 0.3);
    let rk = integrate(&m.post, &s0, 0.3, IntegratorConfig::default()).unwrap();
    let d = eval_window(&w, 0.15).unwrap().delta[0] - interpolate_delta(&rk, 0.15)[0];
    assert!(d.abs() < 0.01, "{d}");
    assert!(eval_window(&w, 0.31).is_err());
}

#[test]
fn boundaries_are_continuous() {
    let m = SystemModel::build(builtin("ieee9").unwrap()).unwrap();
    let mut s = m.equilibrium();
    s.omega_dev[2] = 2.0;
    for mode in [HandoffMode::AnalyticDerivative, HandoffMode::TwoPoint] {
        let mut state = s.clone();
        for _ in 0..10 {
            let w = derive_window(&m.post, &state, SeriesOrder::new(4))
                .unwrap()
                .over(0.0, 0.05);
            let end = w.state_at(0.05);
            let next_state = handoff_state(&w, 0.05, mode);
            let next = derive_window(&m.post, &next_state, SeriesOrder::new(4)).unwrap();
            let start = eval_window(&next, 0.0).unwrap();
            for i in 0..m.k() {
                assert!((start.delta[i] - end.delta[i]).abs() <= 1e-12);
                if mode == HandoffMode::AnalyticDerivative {
                    assert!((start.omega_dev[i] - end.omega_dev[i]).abs() <= 1e-12);
                }
            }
            state = next_state;
        }
    }
}

#[test]
fn chained_trajectory_is_well_formed() {
    let m = smib();
    let cfg = WindowConfig::fixed(3, 0.17);
    let run = simulate_sas(&m.post, &m.initial_state(), 3.0, &cfg).unwrap();
    let tr = &run.trajectory;
    tr.validate().unwrap();
    assert_eq!(run.windows, 18);
    assert_eq!(tr.times.last().copied(), Some(3.0));
    assert!(tr.window_boundaries.iter().all(|b| tr.times.contains(b)));
    assert_eq!(tr.len(), 1 + 2 * run.windows);
}

#[test]
fn single_window_run() {
    let m = smib();
    let s0 = m.initial_state();
    let cfg = WindowConfig::fixed(3, 0.17);
    let run = simulate_sas(&m.post, &s0, 0.17, &cfg).unwrap();
    assert_eq!(run.windows, 1);
    let w = derive_window(&m.post, &s0, SeriesOrder::new(3))
        .unwrap()
        .over(0.0, 0.17);
    assert_eq!(
        run.trajectory.last().unwrap().1,
        &eval_window(&w, 0.17).unwrap()
    );
}

#[test]
fn adaptive_cuts_respect_the_threshold() {
    let m = smib();
    let s0 = m.initial_state();
    let mut cfg = WindowConfig::fixed(3, 0.3);
    cfg.adaptive = true;
    cfg.i_loa_max = 2.0;
    cfg.samples_per_window = 7;
    let run = simulate_sas(&m.post, &s0, 2.0, &cfg).unwrap();
    assert!(run.adaptive_cuts > 0);
    let tr = &run.trajectory;
    let bounds = &tr.window_boundaries;
    for (k, &b) in bounds.iter().enumerate() {
        let start = tr.times.iter().position(|&t| t == b).unwrap();
        let w = derive_window(&m.post, &tr.states[start], SeriesOrder::new(3)).unwrap();
        let end = bounds.get(k + 1).copied().unwrap_or(f64::INFINITY);
        for &t in tr.times.iter().filter(|&&t| t > b && t <= end) {
            assert!(i_loa(&w, t - b) <= cfg.i_loa_max, "window at {b}, t {t}");
        }
    }
}

#[test]
fn too_few_terms_diverge_with_an_error() {
    let m = smib();
    let mut s0 = m.initial_state();
    s0.omega_dev[0] = 40.0;
    let mut cfg = WindowConfig::fixed(3, 0.5);
    cfg.adaptive = true;
    cfg.i_loa_max = 1e-3;
    let err = simulate_sas(&m.post, &s0, 1.0, &cfg).unwrap_err();
    assert!(err.is_numerical(), "{err}");
}

#[test]
fn invalid_configs_are_rejected() {
    let m = smib();
    let s0 = m.initial_state();
    assert!(simulate_sas(&m.post, &s0, 0.0, &WindowConfig::default()).is_err());
    assert!(simulate_sas(&m.post, &s0, 1.0, &WindowConfig::fixed(3, 0.0)).is_err());
    let mut cfg = WindowConfig::fixed(2, 0.1);
    cfg.adaptive = true;
    assert!(simulate_sas(&m.post, &s0, 1.0, &cfg).is_err());
}

#[test]
fn sample_placement_counts_the_window_start() {
    let s = sample_points(0.1, 5, HandoffMode::AnalyticDerivative);
    assert_eq!(s.len(), 4);
    assert_eq!(s.last().copied(), Some(0.1));
    let s = sample_points(0.1, 3, HandoffMode::TwoPoint);
    assert_eq!(s.len(), 3);
}

fn pendulum() -> SwingRhsParams {
    let net = ReducedNetwork::from_polar(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.7, 1.7, 0.0]),
        DMatrix::from_row_slice(2, 2, &[0.0, FRAC_PI_2, FRAC_PI_2, 0.0]),
    )
    .unwrap();
    SwingRhsParams::new(
        377.0,
        vec![
            MachineDynamics {
                h: 3.0,
                d: 1.0,
                pm: 1.7 * 1.0472f64.sin(),
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

#[test]
fn kicked_window_inside_the_accuracy_radius_is_accurate() {
    let rhs = pendulum();
    let s0 = MachineState::new(vec![1.1429, 0.0], vec![3.7639, 0.0]).unwrap();
    let span = 0.8 * system_ra(&rhs, &s0, 1, 5.0).unwrap();
    assert!(span > 0.15 && span < 0.25, "{span}");
    let w = derive_window(&rhs, &s0, SeriesOrder::new(5))
        .unwrap()
        .over(0.0, span);
    let rk = integrate(&rhs, &s0, span, IntegratorConfig::with_dt(1e-4)).unwrap();
    for t in sample_points(span, 3, HandoffMode::TwoPoint) {
        let e = (w.delta_at(t)[0] - interpolate_delta(&rk, t)[0]).abs();
        assert!(e < 0.01, "t {t}: {e}");
    }
}
