//! Generator internal-node augmentation and Kron reduction.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::case::GeneratorParams;
use super::ybus::BusAdmittance;
use crate::error::{Error, Result};

/// Admittance among generator internal nodes, stored in polar form.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedNetwork {
    y_mag: DMatrix<f64>,
    y_ang: DMatrix<f64>,
}

impl ReducedNetwork {
    pub fn from_complex(y: &DMatrix<Complex64>) -> Self {
        Self {
            y_mag: y.map(|v| v.norm()),
            y_ang: y.map(|v| v.arg()),
        }
    }

    /// Builds a network from explicit polar entries (row-major K x K).
    pub fn from_polar(y_mag: DMatrix<f64>, y_ang: DMatrix<f64>) -> Result<Self> {
        if y_mag.shape() != y_ang.shape() || y_mag.nrows() != y_mag.ncols() {
            return Err(Error::InvalidArgument(
                "admittance matrices must be square and equal-sized".into(),
            ));
        }
        if y_mag.iter().any(|m| !m.is_finite() || *m < 0.0) || y_ang.iter().any(|a| !a.is_finite())
        {
            return Err(Error::InvalidArgument(
                "admittance entries must be finite, magnitudes >= 0".into(),
            ));
        }
        Ok(Self { y_mag, y_ang })
    }

    pub fn k(&self) -> usize {
        self.y_mag.nrows()
    }

    pub fn mag(&self, i: usize, j: usize) -> f64 {
        self.y_mag[(i, j)]
    }

    pub fn ang(&self, i: usize, j: usize) -> f64 {
        self.y_ang[(i, j)]
    }

    /// Self-conductance `G_ii = Y_ii cos(theta_ii)`.
    pub fn conductance(&self, i: usize) -> f64 {
        self.y_mag[(i, i)] * self.y_ang[(i, i)].cos()
    }

    pub fn admittance(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.y_mag[(i, j)], self.y_ang[(i, j)])
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.k(), self.k(), |i, j| self.admittance(i, j))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let k = self.k();
        (0..k)
            .all(|i| (0..k).all(|j| (self.admittance(i, j) - self.admittance(j, i)).norm() <= tol))
    }
}

/// Kron reduction `Y_kk - Y_ke Y_ee^-1 Y_ek` keeping the nodes in `keep`
/// (result ordered as `keep`).
///
/// Eliminated nodes that cannot reach a kept node are reported as an island
/// by their index.
pub fn kron_reduce(
    y: &DMatrix<Complex64>,
    keep: &[usize],
) -> std::result::Result<DMatrix<Complex64>, KronError> {
    let n = y.nrows();
    let mut kept = vec![false; n];
    for &k in keep {
        kept[k] = true;
    }
    let elim: Vec<usize> = (0..n).filter(|&i| !kept[i]).collect();

    let unreached = unreachable_nodes(y, keep);
    if !unreached.is_empty() {
        return Err(KronError::Island(unreached));
    }

    let nk = keep.len();
    let yk = DMatrix::from_fn(nk, nk, |a, b| y[(keep[a], keep[b])]);
    if elim.is_empty() {
        return Ok(yk);
    }
    let ne = elim.len();
    let yee = DMatrix::from_fn(ne, ne, |a, b| y[(elim[a], elim[b])]);
    let yek = DMatrix::from_fn(ne, nk, |a, b| y[(elim[a], keep[b])]);
    let yke = DMatrix::from_fn(nk, ne, |a, b| y[(keep[a], elim[b])]);
    let x = yee.lu().solve(&yek).ok_or(KronError::Singular)?;
    let red = yk - yke * x;
    if red.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(KronError::Singular);
    }
    Ok(red)
}

#[derive(Debug, Clone, PartialEq)]
pub enum KronError {
    Island(Vec<usize>),
    Singular,
}

fn unreachable_nodes(y: &DMatrix<Complex64>, keep: &[usize]) -> Vec<usize> {
    let n = y.nrows();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = keep.iter().copied().collect();
    for &k in keep {
        seen[k] = true;
    }
    while let Some(a) = queue.pop_front() {
        for b in 0..n {
            if !seen[b] && b != a && y[(a, b)].norm() > 0.0 {
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    (0..n).filter(|&i| !seen[i]).collect()
}

/// Bus admittance augmented with one internal node per generator, appended
/// after the buses in generator order and tied to the terminal bus through
/// `1 / (j xdp)`.
pub fn augment(ybus: &BusAdmittance, gens: &[GeneratorParams]) -> Result<DMatrix<Complex64>> {
    let n = ybus.bus_ids.len();
    let k = gens.len();
    let mut y = DMatrix::from_element(n + k, n + k, Complex64::new(0.0, 0.0));
    y.view_mut((0, 0), (n, n)).copy_from(&ybus.matrix);
    for (g, gen) in gens.iter().enumerate() {
        let b = ybus.index_of(gen.bus).ok_or_else(|| {
            Error::Validation(format!("generator bus {} not in network", gen.bus))
        })?;
        let yg = Complex64::new(0.0, gen.xdp).inv();
        let i = n + g;
        y[(i, i)] += yg;
        y[(b, b)] += yg;
        y[(i, b)] -= yg;
        y[(b, i)] -= yg;
    }
    Ok(y)
}

/// Reduces to the generator internal nodes plus the listed buses (appended
/// after the internal nodes, in the given order).
pub fn reduce_keeping(
    ybus: &BusAdmittance,
    gens: &[GeneratorParams],
    extra_buses: &[i64],
) -> Result<DMatrix<Complex64>> {
    let n = ybus.bus_ids.len();
    let aug = augment(ybus, gens)?;
    let mut keep: Vec<usize> = (n..n + gens.len()).collect();
    for &b in extra_buses {
        keep.push(
            ybus.index_of(b)
                .ok_or_else(|| Error::Validation(format!("bus {b} not in network")))?,
        );
    }
    kron_reduce(&aug, &keep).map_err(|e| match e {
        KronError::Island(nodes) => Error::Island {
            buses: nodes
                .into_iter()
                .filter(|&i| i < n)
                .map(|i| ybus.bus_ids[i])
                .collect(),
        },
        KronError::Singular => Error::Singular,
    })
}

/// Kron-reduces the augmented network to the generator internal nodes.
pub fn augment_and_reduce(
    ybus: &BusAdmittance,
    gens: &[GeneratorParams],
) -> Result<ReducedNetwork> {
    Ok(ReducedNetwork::from_complex(&reduce_keeping(
        ybus,
        gens,
        &[],
    )?))
}
