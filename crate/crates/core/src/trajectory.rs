//! Machine states, sampled trajectories and their CSV form.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Rotor angles (rad) and speed deviations (rad/s) of every machine.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineState {
    pub delta: Vec<f64>,
    pub omega_dev: Vec<f64>,
}

impl MachineState {
    pub fn new(delta: Vec<f64>, omega_dev: Vec<f64>) -> Result<Self> {
        if delta.len() != omega_dev.len() {
            return Err(Error::InvalidArgument(format!(
                "{} angles but {} speeds",
                delta.len(),
                omega_dev.len()
            )));
        }
        Ok(Self { delta, omega_dev })
    }

    pub fn at_rest(delta: Vec<f64>) -> Self {
        let k = delta.len();
        Self {
            delta,
            omega_dev: vec![0.0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.delta.len()
    }

    pub fn is_finite(&self) -> bool {
        self.delta
            .iter()
            .chain(&self.omega_dev)
            .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Rk4,
    Sas,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MachineState>,
    pub source: Source,
    /// Window start times for series solutions; empty for RK4.
    pub window_boundaries: Vec<f64>,
    /// Generator id per machine, used as CSV column labels. Empty means
    /// 1-based positions.
    pub ids: Vec<i64>,
}

impl Trajectory {
    pub fn new(source: Source) -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            source,
            window_boundaries: Vec::new(),
            ids: Vec::new(),
        }
    }

    pub fn with_ids(mut self, ids: Vec<i64>) -> Self {
        self.ids = ids;
        self
    }

    /// Column label of machine `i`.
    pub fn id(&self, i: usize) -> i64 {
        self.ids.get(i).copied().unwrap_or(i as i64 + 1)
    }

    /// Machine index carrying label `id`.
    pub fn index_of_id(&self, id: i64) -> Option<usize> {
        (0..self.k()).find(|&i| self.id(i) == id)
    }

    pub fn push(&mut self, t: f64, state: MachineState) {
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn k(&self) -> usize {
        self.states.first().map_or(0, MachineState::k)
    }

    pub fn last(&self) -> Option<(f64, &MachineState)> {
        self.times.last().copied().zip(self.states.last())
    }

    /// Shifts every time stamp (and boundary) by `dt`.
    pub fn shifted(mut self, dt: f64) -> Self {
        for t in self
            .times
            .iter_mut()
            .chain(self.window_boundaries.iter_mut())
        {
            *t += dt;
        }
        self
    }

    /// Appends `other`, skipping its leading samples that do not advance time.
    pub fn append(&mut self, other: Trajectory) {
        let last = self.times.last().copied().unwrap_or(f64::NEG_INFINITY);
        for (t, s) in other.times.into_iter().zip(other.states) {
            if t > last {
                self.push(t, s);
            }
        }
        self.window_boundaries.extend(other.window_boundaries);
    }

    /// `delta_i - delta_ref` series for every machine.
    pub fn relative_angles(&self, reference: usize) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .map(|s| s.delta.iter().map(|d| d - s.delta[reference]).collect())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Trajectory(
                "times must be strictly increasing".into(),
            ));
        }
        if self.states.iter().any(|s| !s.is_finite()) {
            return Err(Error::Trajectory("non-finite state".into()));
        }
        Ok(())
    }

    /// CSV with header `t,delta_<id>..,omega_<id>..`.
    pub fn to_csv(&self) -> String {
        let k = self.k();
        let mut out = String::from("t");
        for i in 0..k {
            let _ = write!(out, ",delta_{}", self.id(i));
        }
        for i in 0..k {
            let _ = write!(out, ",omega_{}", self.id(i));
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&fmt_sig(*t));
            for v in s.delta.iter().chain(&s.omega_dev) {
                out.push(',');
                out.push_str(&fmt_sig(*v));
            }
            out.push('\n');
        }
        out
    }

    /// Relative-angle CSV `t,delta_<id>_<ref id>,..` against machine `reference`
    /// (0-based), omitting the reference column itself.
    pub fn to_relative_csv(&self, reference: usize) -> String {
        let k = self.k();
        let mut out = String::from("t");
        for i in (0..k).filter(|&i| i != reference) {
            let _ = write!(out, ",delta_{}_{}", self.id(i), self.id(reference));
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&fmt_sig(*t));
            for i in (0..k).filter(|&i| i != reference) {
                out.push(',');
                out.push_str(&fmt_sig(s.delta[i] - s.delta[reference]));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the absolute-angle CSV written by [`Trajectory::to_csv`].
    pub fn from_csv(text: &str, source: Source) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Trajectory("empty CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"t") || cols.len() % 2 == 0 {
            return Err(Error::Trajectory(format!("unexpected header `{header}`")));
        }
        let k = (cols.len() - 1) / 2;
        let bad = || Error::Trajectory(format!("unexpected header `{header}`"));
        let mut ids = Vec::with_capacity(k);
        for i in 0..k {
            let id: i64 = cols[1 + i]
                .strip_prefix("delta_")
                .and_then(|v| v.parse().ok())
                .ok_or_else(bad)?;
            if cols[1 + k + i] != format!("omega_{id}") {
                return Err(bad());
            }
            ids.push(id);
        }
        let mut traj = Trajectory::new(source).with_ids(ids);
        for (row, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Trajectory(format!("row {}: {e}", row + 1)))?;
            if vals.len() != cols.len() {
                return Err(Error::Trajectory(format!(
                    "row {} has {} fields",
                    row + 1,
                    vals.len()
                )));
            }
            traj.push(
                vals[0],
                MachineState {
                    delta: vals[1..=k].to_vec(),
                    omega_dev: vals[k + 1..].to_vec(),
                },
            );
        }
        traj.validate()?;
        Ok(traj)
    }
}

/// Formats `v` with 9 significant digits.
pub fn fmt_sig(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding can carry into a new leading digit; the extra digit is harmless.
        if s.contains('.') {
            let s = s.trim_end_matches('0').trim_end_matches('.');
            if s == "-0" {
                "0".to_string()
            } else {
                s.to_string()
            }
        } else {
            s
        }
    } else {
        format!("{v:.8e}")
    }
}
