//! Adomian polynomials of the swing nonlinearity and the modified-ADM
//! recursion that produces one [`SasWindow`].
//!
//! Every Adomian polynomial `A_n` is the `λ^n` coefficient of
//! `f(Σ x_k λ^k)`, where each `x_k` is itself a truncated series in local
//! time. The composition runs in λ through the recurrences
//! `S_n = (1/n) Σ k D_k C_{n-k}` and `C_n = -(1/n) Σ k D_k S_{n-k}` for the
//! sine and cosine of each angle difference `D = δ_i - δ_j`.

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;
use crate::trajectory::MachineState;

pub use crate::swing::{MachineDynamics, SwingRhsParams};

/// Number of retained terms `N` and the time-degree cap `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesOrder {
    pub n_terms: usize,
    pub max_degree: usize,
}

impl SeriesOrder {
    /// `N` terms with `M = 2N`; term `x_n` never exceeds degree `2n`.
    pub fn new(n_terms: usize) -> Self {
        Self {
            n_terms,
            max_degree: 2 * n_terms,
        }
    }

    pub fn with_max_degree(self, max_degree: usize) -> Self {
        Self { max_degree, ..self }
    }
}

/// `Σ_n x_n λ^n` for every machine: `terms[n][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSeries {
    terms: Vec<Vec<TruncatedSeries>>,
}

impl LambdaSeries {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn from_terms(terms: Vec<Vec<TruncatedSeries>>) -> Self {
        Self { terms }
    }

    pub fn push(&mut self, order_terms: Vec<TruncatedSeries>) {
        self.terms.push(order_terms);
    }

    /// Number of stored λ-orders.
    pub fn orders(&self) -> usize {
        self.terms.len()
    }

    pub fn order(&self, n: usize) -> &[TruncatedSeries] {
        &self.terms[n]
    }

    pub fn term(&self, n: usize, machine: usize) -> &TruncatedSeries {
        &self.terms[n][machine]
    }
}

impl Default for LambdaSeries {
    fn default() -> Self {
        Self::new()
    }
}

/// Incremental λ-series of `sin u` and `cos u` for `u = Σ u_n λ^n`.
#[derive(Debug, Clone)]
pub struct LambdaSinCos {
    u: Vec<TruncatedSeries>,
    s: Vec<TruncatedSeries>,
    c: Vec<TruncatedSeries>,
}

impl LambdaSinCos {
    pub fn new() -> Self {
        Self {
            u: Vec::new(),
            s: Vec::new(),
            c: Vec::new(),
        }
    }

    /// Appends `u_n` and returns `(S_n, C_n)`.
    pub fn push(&mut self, u_n: TruncatedSeries) -> (&TruncatedSeries, &TruncatedSeries) {
        let n = self.u.len();
        self.u.push(u_n);
        if n == 0 {
            let (s, c) = self.u[0].sin_cos();
            self.s.push(s);
            self.c.push(c);
        } else {
            let m = self.u[0].max_degree();
            let mut s = TruncatedSeries::zeros(m);
            let mut c = TruncatedSeries::zeros(m);
            let inv = 1.0 / n as f64;
            for k in 1..=n {
                let w = k as f64 * inv;
                s.add_product(&self.u[k], &self.c[n - k], w);
                c.add_product(&self.u[k], &self.s[n - k], -w);
            }
            self.s.push(s);
            self.c.push(c);
        }
        (&self.s[n], &self.c[n])
    }

    pub fn sin_terms(&self) -> &[TruncatedSeries] {
        &self.s
    }

    pub fn cos_terms(&self) -> &[TruncatedSeries] {
        &self.c
    }
}

impl Default for LambdaSinCos {
    fn default() -> Self {
        Self::new()
    }
}

/// λ-coefficients of `(sin u, cos u)` through the order of `u`.
pub fn lambda_sin_cos(u: &[TruncatedSeries]) -> (Vec<TruncatedSeries>, Vec<TruncatedSeries>) {
    let mut sc = LambdaSinCos::new();
    for un in u {
        sc.push(un.clone());
    }
    (sc.s, sc.c)
}

/// Adomian polynomials `A_0 .. A_{len-1}` of `cos(x)`.
pub fn cos_adomian(x: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
    lambda_sin_cos(x).1
}

/// Adomian polynomials `A_0 .. A_{len-1}` of the polynomial
/// `f(u) = Σ_k poly[k] u^k`.
pub fn polynomial_adomian(poly: &[f64], x: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let m = x[0].max_degree();
    let mut out = vec![TruncatedSeries::zeros(m); n];
    // power[j] = λ^j coefficient of u^k for the current k.
    let mut power: Vec<TruncatedSeries> = (0..n)
        .map(|j| {
            if j == 0 {
                TruncatedSeries::constant(1.0, m)
            } else {
                TruncatedSeries::zeros(m)
            }
        })
        .collect();
    for (k, &p) in poly.iter().enumerate() {
        if k > 0 {
            let mut next = vec![TruncatedSeries::zeros(m); n];
            for (j, nj) in next.iter_mut().enumerate() {
                for l in 0..=j {
                    nj.add_product(&power[l], &x[j - l], 1.0);
                }
            }
            power = next;
        }
        if p != 0.0 {
            for (o, pw) in out.iter_mut().zip(&power) {
                o.add_scaled(pw, p);
            }
        }
    }
    out
}

/// Adomian polynomials of the swing nonlinearity, one λ-order at a time.
///
/// The per-pair sine and cosine recurrences are kept in flat buffers laid
/// out order-major, `[order][pair][degree]`.
#[derive(Debug, Clone)]
pub struct AdomianExpansion<'a> {
    rhs: &'a SwingRhsParams,
    width: usize,
    u: Vec<f64>,
    s: Vec<f64>,
    c: Vec<f64>,
    /// Coefficient counts up to the last nonzero one, `[order][pair]`.
    u_len: Vec<usize>,
    s_len: Vec<usize>,
    c_len: Vec<usize>,
    order: usize,
}

/// `out += k a b`, truncated to `out.len()`; returns the touched length.
fn mul_acc(out: &mut [f64], a: &[f64], b: &[f64], k: f64) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let w = out.len();
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let kai = k * ai;
        for (o, &bj) in out[i..].iter_mut().zip(b) {
            *o += kai * bj;
        }
    }
    (a.len() + b.len() - 1).min(w)
}

fn trimmed_len(v: &[f64]) -> usize {
    v.iter().rposition(|&c| c != 0.0).map_or(0, |p| p + 1)
}

impl<'a> AdomianExpansion<'a> {
    pub fn new(rhs: &'a SwingRhsParams, max_degree: usize) -> Self {
        Self::with_orders(rhs, max_degree, 0)
    }

    /// Reserves room for `orders` pushes.
    pub fn with_orders(rhs: &'a SwingRhsParams, max_degree: usize, orders: usize) -> Self {
        let np = rhs.pairs().len();
        let cap = orders * np * (max_degree + 1);
        Self {
            rhs,
            width: max_degree + 1,
            u: Vec::with_capacity(cap),
            s: Vec::with_capacity(cap),
            c: Vec::with_capacity(cap),
            u_len: Vec::with_capacity(orders * np),
            s_len: Vec::with_capacity(orders * np),
            c_len: Vec::with_capacity(orders * np),
            order: 0,
        }
    }

    /// Orders consumed so far.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Consumes `x_n` (one series per machine) and returns `A_{i,n}`.
    pub fn push(&mut self, x_n: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
        let k = self.rhs.k();
        let w = self.width;
        let n = self.order;
        let pairs = self.rhs.pairs();
        let np = pairs.len();
        let base = n * np * w;
        self.u.resize(base + np * w, 0.0);
        self.s.resize(base + np * w, 0.0);
        self.c.resize(base + np * w, 0.0);
        let (u_prev, u_cur) = self.u.split_at_mut(base);
        let (s_prev, s_cur) = self.s.split_at_mut(base);
        let (c_prev, c_cur) = self.c.split_at_mut(base);

        let mut a = vec![0.0; k * w];
        if n == 0 {
            for i in 0..k {
                a[i * w] = self.rhs.net_power(i);
            }
        }
        let inv = if n > 0 { 1.0 / n as f64 } else { 0.0 };
        for (p, cp) in pairs.iter().enumerate() {
            let o = p * w;
            let u_n = &mut u_cur[o..o + w];
            for ((d, a_), b_) in u_n
                .iter_mut()
                .zip(x_n[cp.i].coeffs())
                .zip(x_n[cp.j].coeffs())
            {
                *d = a_ - b_;
            }
            let ul = trimmed_len(u_n);
            self.u_len.push(ul);
            let s_n = &mut s_cur[o..o + w];
            let c_n = &mut c_cur[o..o + w];

            let (sl, cl) = if n == 0 {
                let (sv, cv) = u_n[0].sin_cos();
                s_n[0] = sv;
                c_n[0] = cv;
                if ul <= 1 {
                    (usize::from(sv != 0.0), usize::from(cv != 0.0))
                } else {
                    for d in 1..w {
                        let mut sd = 0.0;
                        let mut cd = 0.0;
                        for j in 1..=d.min(ul - 1) {
                            let ku = j as f64 * u_n[j];
                            sd += ku * c_n[d - j];
                            cd -= ku * s_n[d - j];
                        }
                        s_n[d] = sd / d as f64;
                        c_n[d] = cd / d as f64;
                    }
                    (trimmed_len(s_n), trimmed_len(c_n))
                }
            } else {
                let (mut sl, mut cl) = (0, 0);
                for m in 1..=n {
                    let wt = m as f64 * inv;
                    let um = if m == n {
                        &u_n[..ul]
                    } else {
                        let off = (m * np + p) * w;
                        &u_prev[off..off + self.u_len[m * np + p]]
                    };
                    let q = (n - m) * np + p;
                    let off = q * w;
                    let cq = &c_prev[off..off + self.c_len[q]];
                    let sq = &s_prev[off..off + self.s_len[q]];
                    sl = sl.max(mul_acc(s_n, um, cq, wt));
                    cl = cl.max(mul_acc(c_n, um, sq, -wt));
                }
                (sl, cl)
            };
            self.s_len.push(sl);
            self.c_len.push(cl);

            // Pe_i gains wc cos + ws sin; Pe_j gains wc cos - ws sin.
            let top = sl.max(cl);
            let (ai, aj) = (cp.i * w, cp.j * w);
            for d in 0..top {
                let (sv, cv) = (s_n[d], c_n[d]);
                a[ai + d] -= cp.wc * cv + cp.ws * sv;
                a[aj + d] -= cp.wc * cv - cp.ws * sv;
            }
        }
        self.order += 1;
        a.chunks(w)
            .enumerate()
            .map(|(i, ch)| {
                let g = self.rhs.gain(i);
                TruncatedSeries::from_iter_exact(ch.iter().map(|v| v * g))
            })
            .collect()
    }
}

/// `A_{i,n}` for every machine, given stored orders `0..=order` in `x`.
pub fn adomian_terms(
    rhs: &SwingRhsParams,
    x: &LambdaSeries,
    order: usize,
) -> Result<Vec<TruncatedSeries>> {
    if order >= x.orders() {
        return Err(Error::OrderOutOfRange {
            requested: order,
            available: x.orders(),
        });
    }
    let m = x.term(0, 0).max_degree();
    let mut exp = AdomianExpansion::new(rhs, m);
    let mut last = Vec::new();
    for n in 0..=order {
        last = exp.push(x.order(n));
    }
    Ok(last)
}

/// Semi-analytic solution over one window, in local time `t ∈ [0, span]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SasWindow {
    pub t_start: f64,
    pub span: f64,
    pub n_terms: usize,
    /// `terms[i][n]` is `x_{i,n}(t)`.
    pub terms: Vec<Vec<TruncatedSeries>>,
    pub sum: Vec<TruncatedSeries>,
    pub sum_deriv: Vec<TruncatedSeries>,
    pub last_term_deriv: Vec<TruncatedSeries>,
}

impl SasWindow {
    /// Places the window at `t_start` with length `span`.
    pub fn over(mut self, t_start: f64, span: f64) -> Self {
        self.t_start = t_start;
        self.span = span;
        self
    }

    pub fn k(&self) -> usize {
        self.sum.len()
    }

    /// Rotor angles at local time `t` without range checking.
    pub fn delta_at(&self, t: f64) -> Vec<f64> {
        self.sum.iter().map(|s| s.eval(t)).collect()
    }

    pub fn omega_at(&self, t: f64) -> Vec<f64> {
        self.sum_deriv.iter().map(|s| s.eval(t)).collect()
    }

    pub fn state_at(&self, t: f64) -> MachineState {
        MachineState {
            delta: self.delta_at(t),
            omega_dev: self.omega_at(t),
        }
    }
}

/// Runs the modified-ADM recursion from `state0`:
/// `x_0 = δ(0)`, `x_1 = Δω(0) t - a∬ẋ_0 + ∬A_0`,
/// `x_{n+2} = -a∬ẋ_{n+1} + ∬A_{n+1}`.
///
/// The window starts at 0 with unbounded span; use [`SasWindow::over`].
pub fn derive_window(
    rhs: &SwingRhsParams,
    state0: &MachineState,
    order: SeriesOrder,
) -> Result<SasWindow> {
    let k = rhs.k();
    let n_terms = order.n_terms;
    let m = order.max_degree;
    if n_terms < 2 {
        return Err(Error::InvalidArgument(format!(
            "at least 2 terms needed, got {n_terms}"
        )));
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "degree cap must be at least 2, got {m}"
        )));
    }
    if state0.k() != k || state0.omega_dev.len() != k {
        return Err(Error::InvalidArgument(format!(
            "state has {} machines, model has {k}",
            state0.k()
        )));
    }
    if !state0.is_finite() {
        return Err(Error::InvalidArgument("initial state is not finite".into()));
    }

    let mut exp = AdomianExpansion::with_orders(rhs, m, n_terms - 1);
    let mut by_order: Vec<Vec<TruncatedSeries>> = Vec::with_capacity(n_terms);
    by_order.push(
        state0
            .delta
            .iter()
            .map(|&d| TruncatedSeries::constant(d, m))
            .collect(),
    );

    for n in 0..n_terms - 1 {
        let a = exp.push(&by_order[n]);
        let next: Vec<TruncatedSeries> = (0..k)
            .map(|i| {
                let mut x = a[i].integrate_twice();
                let damp = rhs.damping_coeff(i);
                if damp != 0.0 {
                    x.add_scaled(&by_order[n][i].differentiate().integrate_twice(), -damp);
                }
                if n == 0 {
                    let mut lin = TruncatedSeries::linear(0.0, state0.omega_dev[i], m);
                    lin.add_scaled(&x, 1.0);
                    x = lin;
                }
                x
            })
            .collect();
        if let Some(i) = next.iter().position(|x| !x.is_finite()) {
            return Err(Error::NumericalOverflow {
                machine: i,
                order: n + 1,
            });
        }
        by_order.push(next);
    }

    let mut terms = vec![Vec::with_capacity(n_terms); k];
    for order_terms in by_order {
        for (i, x) in order_terms.into_iter().enumerate() {
            terms[i].push(x);
        }
    }
    let sum: Vec<TruncatedSeries> = terms
        .iter()
        .map(|ts| {
            let mut s = TruncatedSeries::zeros(m);
            for x in ts {
                s.add_scaled(x, 1.0);
            }
            s
        })
        .collect();
    let sum_deriv = sum.iter().map(TruncatedSeries::differentiate).collect();
    let last_term_deriv = terms
        .iter()
        .map(|ts| ts.last().expect("n_terms >= 2").differentiate())
        .collect();

    Ok(SasWindow {
        t_start: 0.0,
        span: f64::INFINITY,
        n_terms,
        terms,
        sum,
        sum_deriv,
        last_term_deriv,
    })
}

/// State at local time `t_local ∈ [0, span]`.
pub fn eval_window(w: &SasWindow, t_local: f64) -> Result<MachineState> {
    let slack = if w.span.is_finite() {
        1e-12 * w.span.max(1.0)
    } else {
        0.0
    };
    if !(t_local >= 0.0 && t_local <= w.span + slack) {
        return Err(Error::OutOfWindow {
            t: t_local,
            span: w.span,
        });
    }
    Ok(w.state_at(t_local))
}
