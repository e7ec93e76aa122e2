//! Accuracy window `R_A`, minimum inertia `H_min`, transfer admittance and
//! small-signal mode periods.
//!
//! `R_A` comes from the third term of an `N = 3` series for the machine
//! swinging against a reference of infinite inertia: `x_2 = c1 t^4 + c2 t^3`
//! (plus a `t^2` damping term). `R_A` is the smallest `R > 0` with
//! `|4 c1 R^3 + 3 c2 R^2| = I_LOA,max`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::adm::{derive_window, SeriesOrder};
use crate::error::{Error, Result};
use crate::netmodel::{
    build_ybus, init_from_powerflow, reduce_keeping, Epoch, PowerSystemCase, ReducedNetwork,
};
use crate::swing::{MachineDynamics, SwingRhsParams};
use crate::trajectory::MachineState;

/// Upper end of the `R_A` search interval, s.
pub const RA_SEARCH_MAX: f64 = 10.0;
/// Inertia search bracket for [`estimate_hmin`], s.
pub const H_SEARCH: (f64, f64) = (1e-2, 1e4);

/// One machine against a reference node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaInputs {
    pub h: f64,
    pub d: f64,
    pub omega0: f64,
    pub pm: f64,
    pub e: f64,
    /// Self-conductance `G` of the machine node.
    pub g: f64,
    pub e_inf: f64,
    pub y: f64,
    pub theta: f64,
    pub delta0_machine: f64,
    pub ddelta0_machine: f64,
    pub delta0_ref: f64,
    pub ddelta0_ref: f64,
    pub i_loa_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootStatus {
    UniquePositive,
    SmallestPositiveOfMany,
    None,
}

impl RootStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootStatus::UniquePositive => "unique",
            RootStatus::SmallestPositiveOfMany => "smallest_of_many",
            RootStatus::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaResult {
    /// `t^4` coefficient of the third term, rad/s^4.
    pub c1: f64,
    /// `t^3` coefficient of the third term, rad/s^3.
    pub c2: f64,
    /// Seconds; infinite when no root exists in the search interval.
    pub r_a: f64,
    pub root_status: RootStatus,
    /// Printed closed-form coefficients, kept as a cross-check.
    pub closed_form_c1: f64,
    pub closed_form_c2: f64,
    /// Largest relative difference between recursion and closed form.
    pub closed_form_discrepancy: f64,
}

impl RaInputs {
    fn validate(&self) -> Result<()> {
        let finite = [
            self.h,
            self.d,
            self.omega0,
            self.pm,
            self.e,
            self.g,
            self.e_inf,
            self.y,
            self.theta,
            self.delta0_machine,
            self.ddelta0_machine,
            self.delta0_ref,
            self.ddelta0_ref,
            self.i_loa_max,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("R_A inputs must be finite".into()));
        }
        if !(self.h > 0.0 && self.y > 0.0 && self.i_loa_max > 0.0) {
            return Err(Error::InvalidArgument(
                "R_A needs H > 0, Y > 0 and a positive I_LOA threshold".into(),
            ));
        }
        Ok(())
    }

    pub fn with_h(self, h: f64) -> Self {
        Self { h, ..self }
    }

    /// Two-machine model: the machine and an infinite-inertia reference.
    pub fn equivalent(&self) -> Result<(SwingRhsParams, MachineState)> {
        let g_ang = if self.g < 0.0 {
            std::f64::consts::PI
        } else {
            0.0
        };
        let net = ReducedNetwork::from_polar(
            DMatrix::from_row_slice(2, 2, &[self.g.abs(), self.y, self.y, 0.0]),
            DMatrix::from_row_slice(2, 2, &[g_ang, self.theta, self.theta, 0.0]),
        )?;
        let rhs = SwingRhsParams::new(
            self.omega0,
            vec![
                MachineDynamics {
                    h: self.h,
                    d: self.d,
                    pm: self.pm,
                    e: self.e,
                    infinite: false,
                },
                MachineDynamics {
                    h: 0.0,
                    d: 0.0,
                    pm: 0.0,
                    e: self.e_inf,
                    infinite: true,
                },
            ],
            net,
        )?;
        let state = MachineState {
            delta: vec![self.delta0_machine, self.delta0_ref],
            omega_dev: vec![self.ddelta0_machine, self.ddelta0_ref],
        };
        Ok((rhs, state))
    }

    /// Coefficients from the printed closed form
    /// `c1 = ω0² Y E E∞ sin φ {(E²G - Pm) + Y E E∞ cos φ} / (96 H²)`,
    /// `c2 = ω0 Y E E∞ (δ̇∞ - δ̇) sin φ / (12 H)`, `φ = θ + δ∞ - δ`.
    pub fn closed_form(&self) -> (f64, f64) {
        let phi = self.theta + self.delta0_ref - self.delta0_machine;
        let w = self.y * self.e * self.e_inf;
        let c1 = self.omega0
            * self.omega0
            * w
            * phi.sin()
            * ((self.e * self.e * self.g - self.pm) + w * phi.cos())
            / (96.0 * self.h * self.h);
        let c2 = self.omega0 * w * (self.ddelta0_ref - self.ddelta0_machine) * phi.sin()
            / (12.0 * self.h);
        (c1, c2)
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Smallest `R ∈ (0, RA_SEARCH_MAX]` with `|4 c1 R^3 + 3 c2 R^2| = level`.
pub fn solve_ra(c1: f64, c2: f64, level: f64) -> (f64, RootStatus) {
    let p = |r: f64| (4.0 * c1 * r * r * r + 3.0 * c2 * r * r).abs() - level;
    // |p| is monotone between 0, the extremum -c2/(2c1), the zero -3c2/(4c1)
    // and the end of the interval.
    let mut cuts = vec![0.0, RA_SEARCH_MAX];
    if c1 != 0.0 {
        for r in [-c2 / (2.0 * c1), -3.0 * c2 / (4.0 * c1)] {
            if r > 0.0 && r < RA_SEARCH_MAX {
                cuts.push(r);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.dedup();

    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (p(a), p(b));
        if fa == 0.0 && a > 0.0 {
            if roots.last() != Some(&a) {
                roots.push(a);
            }
            continue;
        }
        if fb == 0.0 {
            roots.push(b);
            continue;
        }
        if (fa < 0.0) != (fb < 0.0) {
            let (mut lo, mut hi) = (a, b);
            let lo_neg = fa < 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (p(mid) < 0.0) == lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let r = if p(lo).abs() <= p(hi).abs() { lo } else { hi };
            roots.push(r);
        }
    }
    match roots.len() {
        0 => (f64::INFINITY, RootStatus::None),
        1 => (roots[0], RootStatus::UniquePositive),
        _ => (roots[0], RootStatus::SmallestPositiveOfMany),
    }
}

/// `R_A` of one machine against its reference.
pub fn estimate_ra(inputs: &RaInputs) -> Result<RaResult> {
    inputs.validate()?;
    let (rhs, state) = inputs.equivalent()?;
    let w = derive_window(&rhs, &state, SeriesOrder::new(3))?;
    let third = &w.terms[0][2];
    let (c1, c2) = (third.coeff(4), third.coeff(3));
    let (r_a, root_status) = solve_ra(c1, c2, inputs.i_loa_max);
    let (cf1, cf2) = inputs.closed_form();
    Ok(RaResult {
        c1,
        c2,
        r_a,
        root_status,
        closed_form_c1: cf1,
        closed_form_c2: cf2,
        closed_form_discrepancy: rel_diff(c1, cf1).max(rel_diff(c2, cf2)),
    })
}

/// Smallest inertia whose `R_A` reaches `target_ra`; `inputs.h` is ignored.
///
/// Bisects in `log H` over [`H_SEARCH`] and returns the upper end of the
/// final bracket, whose relative width is below `1e-4`.
pub fn estimate_hmin(inputs: &RaInputs, target_ra: f64) -> Result<f64> {
    if !(target_ra > 0.0 && target_ra.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target R_A must be positive, got {target_ra}"
        )));
    }
    let reaches = |h: f64| -> Result<bool> { Ok(estimate_ra(&inputs.with_h(h))?.r_a >= target_ra) };
    let (mut lo, mut hi) = H_SEARCH;
    if !reaches(hi)? {
        return Err(Error::TargetUnreachable {
            target: target_ra,
            h_max: hi,
        });
    }
    if reaches(lo)? {
        return Ok(lo);
    }
    while (hi - lo) / hi >= 1e-4 {
        let mid = (lo * hi).sqrt();
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `R_A` inputs for machine `machine` of `rhs` against machine `reference`,
/// taken from the reduced network and the given state.
pub fn ra_inputs_for(
    rhs: &SwingRhsParams,
    state: &MachineState,
    machine: usize,
    reference: usize,
    i_loa_max: f64,
) -> RaInputs {
    let m = rhs.machine(machine);
    let net = rhs.network();
    RaInputs {
        h: m.h,
        d: m.d,
        omega0: rhs.omega0(),
        pm: m.pm,
        e: m.e,
        g: net.conductance(machine),
        e_inf: rhs.machine(reference).e,
        y: net.mag(machine, reference),
        theta: net.ang(machine, reference),
        delta0_machine: state.delta[machine],
        ddelta0_machine: state.omega_dev[machine],
        delta0_ref: state.delta[reference],
        ddelta0_ref: state.omega_dev[reference],
        i_loa_max,
    }
}

/// Per-machine `R_A` against `reference`; `None` for the reference itself,
/// infinite machines and machines without coupling to the reference.
pub fn machine_ras(
    rhs: &SwingRhsParams,
    state: &MachineState,
    reference: usize,
    i_loa_max: f64,
) -> Result<Vec<Option<RaResult>>> {
    (0..rhs.k())
        .map(|i| {
            if i == reference || rhs.machine(i).infinite || rhs.network().mag(i, reference) == 0.0 {
                Ok(None)
            } else {
                estimate_ra(&ra_inputs_for(rhs, state, i, reference, i_loa_max)).map(Some)
            }
        })
        .collect()
}

/// System `R_A`: the minimum over machines.
pub fn system_ra(
    rhs: &SwingRhsParams,
    state: &MachineState,
    reference: usize,
    i_loa_max: f64,
) -> Result<f64> {
    Ok(machine_ras(rhs, state, reference, i_loa_max)?
        .into_iter()
        .flatten()
        .map(|r| r.r_a)
        .fold(f64::INFINITY, f64::min))
}

/// Node a machine is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceNode {
    /// Internal EMF node of a generator, from the reduction over all
    /// generator internal nodes.
    Generator(i64),
    /// A network bus; the network is reduced to that bus and the machine's
    /// internal node only.
    Bus(i64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferAdmittance {
    pub y: f64,
    pub theta: f64,
    /// Voltage magnitude of the reference node (EMF for a generator).
    pub e_inf: f64,
    /// EMF magnitude of the machine.
    pub e_machine: f64,
}

pub fn transfer_admittance(
    case: &PowerSystemCase,
    machine: i64,
    reference: ReferenceNode,
    epoch: Epoch,
) -> Result<TransferAdmittance> {
    let mi = case
        .generator_index(machine)
        .ok_or_else(|| Error::Validation(format!("unknown generator {machine}")))?;
    let machines = init_from_powerflow(case)?;
    let ybus = build_ybus(case, epoch)?;
    match reference {
        ReferenceNode::Generator(r) => {
            let ri = case
                .generator_index(r)
                .ok_or_else(|| Error::Validation(format!("unknown generator {r}")))?;
            let red = reduce_keeping(&ybus, &case.generators, &[])?;
            let v = red[(mi, ri)];
            Ok(TransferAdmittance {
                y: v.norm(),
                theta: v.arg(),
                e_inf: machines[ri].e,
                e_machine: machines[mi].e,
            })
        }
        ReferenceNode::Bus(b) => {
            let bus = case
                .bus(b)
                .ok_or_else(|| Error::Validation(format!("unknown bus {b}")))?;
            let all = reduce_keeping(&ybus, &case.generators, &[b])?;
            // `all` keeps every internal node plus the bus; fold the other
            // internal nodes away as well.
            let k = case.generators.len();
            let red = crate::netmodel::kron_reduce(&all, &[mi, k]).map_err(|_| Error::Singular)?;
            let v = red[(0, 1)];
            Ok(TransferAdmittance {
                y: v.norm(),
                theta: v.arg(),
                e_inf: bus.voltage_mag.ok_or_else(|| {
                    Error::MissingPowerFlow(format!("bus {b} has no voltage_mag"))
                })?,
                e_machine: machines[mi].e,
            })
        }
    }
}

/// Oscillation modes of the undamped linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAnalysis {
    /// Periods, s, longest first.
    pub periods: Vec<f64>,
    /// Angular frequencies, rad/s, matching `periods`.
    pub frequencies: Vec<f64>,
    /// Angle mode shapes (unit norm) over all machines; infinite machines are zero.
    pub shapes: Vec<Vec<f64>>,
}

/// Eigen-analysis of `M^-1 K` at `equilibrium`, where `M = 2H/ω0` and
/// `K = ∂Pe/∂δ`. Infinite machines are held fixed; the rigid-body mode is
/// dropped.
pub fn mode_periods(rhs: &SwingRhsParams, equilibrium: &MachineState) -> Result<ModeAnalysis> {
    let acc = rhs.acceleration(&equilibrium.delta);
    let residual = acc.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if residual >= 1e-6 {
        return Err(Error::NotEquilibrium { residual });
    }
    let free: Vec<usize> = (0..rhs.k()).filter(|&i| !rhs.machine(i).infinite).collect();
    let n = free.len();
    if n == 0 {
        return Ok(ModeAnalysis {
            periods: vec![],
            frequencies: vec![],
            shapes: vec![],
        });
    }
    let k = rhs.k();
    let mut stiff = DMatrix::<f64>::zeros(k, k);
    let net = rhs.network();
    let d = &equilibrium.delta;
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let w = rhs.machine(i).e * rhs.machine(j).e * net.mag(i, j);
            let v = w * (d[i] - d[j] - net.ang(i, j)).sin();
            stiff[(i, j)] = v;
            stiff[(i, i)] -= v;
        }
    }
    let a = DMatrix::from_fn(n, n, |r, c| {
        let i = free[r];
        stiff[(i, free[c])] * rhs.gain(i)
    });
    let eig = a.complex_eigenvalues();
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut lambdas = Vec::new();
    for z in eig.iter() {
        if z.norm() <= 1e-8 * scale {
            continue;
        }
        if z.re < 0.0 && z.re.abs() > 1e-8 * scale {
            return Err(Error::UnstableEquilibrium { eigenvalue: z.re });
        }
        if z.re > 0.0 {
            lambdas.push(z.re);
        }
    }
    lambdas.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let mut shapes = Vec::with_capacity(lambdas.len());
    for &l in &lambdas {
        let shifted = &a - DMatrix::<f64>::identity(n, n) * l;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let (idx, _) =
            svd.singular_values
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |best, (i, &s)| if s < best.1 { (i, s) } else { best },
                );
        let mut full = vec![0.0; k];
        for (c, &i) in free.iter().enumerate() {
            full[i] = vt[(idx, c)];
        }
        shapes.push(full);
    }
    let frequencies: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    Ok(ModeAnalysis {
        periods: frequencies
            .iter()
            .map(|w| 2.0 * std::f64::consts::PI / w)
            .collect(),
        frequencies,
        shapes,
    })
}
