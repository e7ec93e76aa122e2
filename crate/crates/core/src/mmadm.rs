//! Multistage driver: chains series windows over a horizon, watches the
//! loss-of-accuracy indicator and cuts windows adaptively.

use crate::adm::{derive_window, SasWindow, SeriesOrder};
use crate::error::{Error, Result};
use crate::ra::system_ra;
use crate::swing::SwingRhsParams;
use crate::trajectory::{MachineState, Source, Trajectory};

/// How the next window's initial speed is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandoffMode {
    /// Derivative of the summed series.
    AnalyticDerivative,
    /// Backward difference over `h = span / 100`.
    TwoPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowConfig {
    pub n_terms: usize,
    /// Window length, s.
    pub t_init: f64,
    /// Indicator threshold, rad/s.
    pub i_loa_max: f64,
    pub adaptive: bool,
    /// Samples per window, counting the window's initial point.
    pub samples_per_window: usize,
    pub handoff: HandoffMode,
    /// When set, `R_A` is re-estimated against this machine after every
    /// adaptive cut and the next window length becomes `0.8 R_A`
    /// (capped at `t_init`).
    pub reevaluate_ra: Option<usize>,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            n_terms: 3,
            t_init: 0.04,
            i_loa_max: 5.0,
            adaptive: false,
            samples_per_window: 3,
            handoff: HandoffMode::AnalyticDerivative,
            reevaluate_ra: None,
        }
    }
}

impl WindowConfig {
    pub fn fixed(n_terms: usize, t_init: f64) -> Self {
        Self {
            n_terms,
            t_init,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_init > 0.0 && self.t_init.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "window length must be positive, got {}",
                self.t_init
            )));
        }
        if !(self.i_loa_max > 0.0) {
            return Err(Error::InvalidArgument(
                "I_LOA threshold must be positive".into(),
            ));
        }
        if self.n_terms < 2 || (self.adaptive && self.n_terms < 3) {
            return Err(Error::InvalidArgument(format!(
                "{} terms is too few (2 minimum, 3 with the adaptive indicator)",
                self.n_terms
            )));
        }
        if self.samples_per_window < 3 {
            return Err(Error::InvalidArgument(
                "at least 3 samples per window".into(),
            ));
        }
        Ok(())
    }
}

/// Loss-of-accuracy indicator: largest `|d x_{N-1} / dt|` over machines.
pub fn i_loa(w: &SasWindow, t_local: f64) -> f64 {
    w.last_term_deriv
        .iter()
        .map(|p| p.eval(t_local).abs())
        .fold(0.0, f64::max)
}

fn i_loa_argmax(w: &SasWindow, t_local: f64) -> usize {
    let mut best = (0, -1.0);
    for (i, p) in w.last_term_deriv.iter().enumerate() {
        let v = p.eval(t_local).abs();
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// State handed to the next window from local time `t_cut`.
pub fn handoff_state(w: &SasWindow, t_cut: f64, mode: HandoffMode) -> MachineState {
    let delta = w.delta_at(t_cut);
    let omega_dev = match mode {
        HandoffMode::AnalyticDerivative => w.omega_at(t_cut),
        HandoffMode::TwoPoint => {
            let h = w.span / 100.0;
            let back = w.delta_at(t_cut - h);
            delta.iter().zip(back).map(|(d, b)| (d - b) / h).collect()
        }
    };
    MachineState { delta, omega_dev }
}

/// Local sample times in `(0, span]`, increasing.
pub fn sample_points(span: f64, samples: usize, mode: HandoffMode) -> Vec<f64> {
    let s = samples.max(3);
    match mode {
        HandoffMode::TwoPoint => {
            let mut pts: Vec<f64> = (1..s - 1)
                .map(|j| j as f64 * span / (s - 1) as f64)
                .collect();
            pts.retain(|&t| t < span - span / 100.0);
            pts.push(span - span / 100.0);
            pts.push(span);
            pts
        }
        HandoffMode::AnalyticDerivative => {
            (1..s).map(|j| j as f64 * span / (s - 1) as f64).collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SasRun {
    pub trajectory: Trajectory,
    pub windows: usize,
    pub adaptive_cuts: usize,
}

/// Chains series windows from `state0` over `[0, horizon]`.
pub fn simulate_sas(
    rhs: &SwingRhsParams,
    state0: &MachineState,
    horizon: f64,
    cfg: &WindowConfig,
) -> Result<SasRun> {
    cfg.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let order = SeriesOrder::new(cfg.n_terms);
    let min_window = cfg.t_init / 100.0;
    let end_tol = 1e-12 * horizon.max(1.0);

    let mut traj = Trajectory::new(Source::Sas);
    traj.push(0.0, state0.clone());
    let mut state = state0.clone();
    let mut t = 0.0;
    let mut nominal = cfg.t_init;
    let mut windows = 0;
    let mut cuts = 0;

    while horizon - t > end_tol {
        let base = derive_window(rhs, &state, order)?;
        let mut span = nominal.min(horizon - t);
        if horizon - t - span <= end_tol {
            span = horizon - t;
        }
        let (w, samples, cut) = loop {
            let w = base.clone().over(t, span);
            let samples = sample_points(span, cfg.samples_per_window, cfg.handoff);
            if !cfg.adaptive {
                break (w, samples, false);
            }
            match samples.iter().position(|&s| i_loa(&w, s) > cfg.i_loa_max) {
                None => break (w, samples, false),
                Some(0) => {
                    span *= 0.5;
                    if span < min_window {
                        return Err(Error::Divergence {
                            time: t,
                            machine: i_loa_argmax(&w, samples[0]),
                            min_window,
                        });
                    }
                }
                Some(j) => {
                    let kept: Vec<f64> = samples[..j].to_vec();
                    let cut_at = kept[kept.len() - 1];
                    break (w.over(t, cut_at), kept, true);
                }
            }
        };
        traj.window_boundaries.push(t);
        for &s in &samples {
            let st = w.state_at(s);
            if !st.is_finite() {
                return Err(Error::Divergence {
                    time: t + s,
                    machine: st
                        .delta
                        .iter()
                        .chain(&st.omega_dev)
                        .position(|v| !v.is_finite())
                        .unwrap_or(0)
                        % rhs.k(),
                    min_window,
                });
            }
            traj.push(t + s, st);
        }
        let t_cut = *samples.last().expect("at least one sample");
        state = handoff_state(&w, t_cut, cfg.handoff);
        t += t_cut;
        windows += 1;
        if cut {
            cuts += 1;
            if let Some(r) = cfg.reevaluate_ra {
                let ra = system_ra(rhs, &state, r, cfg.i_loa_max)?;
                nominal = (0.8 * ra).min(cfg.t_init).max(min_window);
            }
        }
    }
    Ok(SasRun {
        trajectory: traj,
        windows,
        adaptive_cuts: cuts,
    })
}
