//! Truncated power series in local time `t`.
//!
//! A [`TruncatedSeries`] holds the coefficients `c_0 .. c_M` of a polynomial
//! `c_0 + c_1 t + ... + c_M t^M`. Every operation keeps the degree bound `M`:
//! products and integrals drop the terms above it.

use std::ops::{Add, Mul, Neg, Sub};

use smallvec::{smallvec, SmallVec};

/// Coefficients stored inline up to degree 15.
type Coeffs = SmallVec<[f64; 16]>;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Coeffs,
}

impl TruncatedSeries {
    pub fn zeros(max_degree: usize) -> Self {
        Self {
            coeffs: smallvec![0.0; max_degree + 1],
        }
    }

    pub fn constant(value: f64, max_degree: usize) -> Self {
        let mut s = Self::zeros(max_degree);
        s.coeffs[0] = value;
        s
    }

    /// The series `c0 + c1 t`.
    pub fn linear(c0: f64, c1: f64, max_degree: usize) -> Self {
        let mut s = Self::constant(c0, max_degree);
        if max_degree >= 1 {
            s.coeffs[1] = c1;
        }
        s
    }

    /// Builds a series from explicit coefficients, zero-padding or truncating
    /// to `max_degree`.
    pub fn from_coeffs(coeffs: &[f64], max_degree: usize) -> Self {
        let mut s = Self::zeros(max_degree);
        for (dst, src) in s.coeffs.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        s
    }

    pub(crate) fn from_iter_exact(coeffs: impl Iterator<Item = f64>) -> Self {
        let coeffs: Coeffs = coeffs.collect();
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Index of the highest nonzero coefficient, `None` for the zero series.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, other: &Self, k: f64) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += k * b;
        }
    }

    /// `self += k * a * b`, truncated to the degree bound.
    pub fn add_product(&mut self, a: &Self, b: &Self, k: f64) {
        let m = self.max_degree();
        let (Some(da), Some(db)) = (a.degree(), b.degree()) else {
            return;
        };
        for i in 0..=da.min(m) {
            let ai = a.coeffs[i];
            if ai == 0.0 {
                continue;
            }
            let kai = k * ai;
            for j in 0..=db.min(m - i) {
                self.coeffs[i + j] += kai * b.coeffs[j];
            }
        }
    }

    /// Product truncated to `M`.
    pub fn mul_series(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.max_degree().min(other.max_degree()));
        out.add_product(self, other, 1.0);
        out
    }

    /// Antiderivative with zero constant of integration.
    pub fn integrate(&self) -> Self {
        let m = self.max_degree();
        let mut out = Self::zeros(m);
        for k in 0..m {
            out.coeffs[k + 1] = self.coeffs[k] / (k + 1) as f64;
        }
        out
    }

    /// Double antiderivative, `c_k t^k -> c_k t^(k+2) / ((k+1)(k+2))`.
    pub fn integrate_twice(&self) -> Self {
        let m = self.max_degree();
        let mut out = Self::zeros(m);
        for k in 0..m.saturating_sub(1) {
            out.coeffs[k + 2] = self.coeffs[k] / ((k + 1) * (k + 2)) as f64;
        }
        out
    }

    pub fn differentiate(&self) -> Self {
        let m = self.max_degree();
        let mut out = Self::zeros(m);
        for k in 1..=m {
            out.coeffs[k - 1] = self.coeffs[k] * k as f64;
        }
        out
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Value of the first derivative at `t`.
    pub fn eval_deriv(&self, t: f64) -> f64 {
        let m = self.max_degree();
        let mut acc = 0.0;
        for k in (1..=m).rev() {
            acc = acc * t + self.coeffs[k] * k as f64;
        }
        acc
    }

    /// `(sin u, cos u)` as truncated series.
    ///
    /// With `u(0) = c`, both functions are propagated by the coupled
    /// recurrence `s' = v u'`, `v' = -s u'` starting from `s_0 = sin c` and
    /// `v_0 = cos c`, which is exact through degree `M`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let m = self.max_degree();
        let mut s = Self::zeros(m);
        let mut v = Self::zeros(m);
        let (s0, c0) = self.coeffs[0].sin_cos();
        s.coeffs[0] = s0;
        v.coeffs[0] = c0;
        for n in 1..=m {
            let mut sn = 0.0;
            let mut vn = 0.0;
            for k in 1..=n {
                let ku = k as f64 * self.coeffs[k];
                sn += ku * v.coeffs[n - k];
                vn -= ku * s.coeffs[n - k];
            }
            s.coeffs[n] = sn / n as f64;
            v.coeffs[n] = vn / n as f64;
        }
        (s, v)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let mut out = self.clone();
        out.add_scaled(rhs, 1.0);
        out
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0);
        out
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.mul_series(rhs)
    }
}

impl Mul<f64> for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn mul(self, rhs: f64) -> TruncatedSeries {
        self.scale(rhs)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        self.scale(-1.0)
    }
}
