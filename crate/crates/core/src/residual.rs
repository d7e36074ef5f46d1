//! Homotopy residual `F(x, s)` and its Jacobian.
//!
//! Rows follow [`StateLayout`](crate::network::StateLayout): one row per edge
//! (in edge order), then one row per junction (in junction order).
//!
//! | row            | equation                                   |
//! |----------------|--------------------------------------------|
//! | pipe `(i,j)`   | `pi_i - pi_j - beta phi |phi|^s`            |
//! | compressor     | `gamma pi_i - pi_j`                        |
//! | non-slack `i`  | `sum_in phi - sum_out phi - q*_i`          |
//! | slack `i`      | `pi_i - pi*_i`                             |
//!
//! `s = 1` is the physical system; `s = 0` is linear.

use crate::network::{Boundary, Device, Network};
use std::fmt::Write as _;
use thiserror::Error;

/// Regularization floor for `|phi|` in the pipe flow derivative.
pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("state has length {actual}, network expects {expected}")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub actual: usize,
}

/// Flows followed by potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    values: Vec<f64>,
    n_edges: usize,
}

impl StateVector {
    pub fn zeros(network: &Network) -> Self {
        Self {
            values: vec![0.0; network.layout().len()],
            n_edges: network.num_edges(),
        }
    }

    pub fn from_values(network: &Network, values: Vec<f64>) -> Result<Self, DimensionMismatch> {
        check_len(network, values.len())?;
        Ok(Self {
            values,
            n_edges: network.num_edges(),
        })
    }

    pub fn from_parts(flows: &[f64], potentials: &[f64]) -> Self {
        let mut values = Vec::with_capacity(flows.len() + potentials.len());
        values.extend_from_slice(flows);
        values.extend_from_slice(potentials);
        Self {
            values,
            n_edges: flows.len(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flows(&self) -> &[f64] {
        &self.values[..self.n_edges]
    }

    pub fn potentials(&self) -> &[f64] {
        &self.values[self.n_edges..]
    }

    /// Infinity-norm distance to another state of the same shape.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_len(network: &Network, actual: usize) -> Result<(), DimensionMismatch> {
    let expected = network.layout().len();
    if actual != expected {
        return Err(DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Square sparse matrix in triplet form. Duplicate entries are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub dim: usize,
    pub triplets: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            triplets: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.triplets.push((row, col, value));
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(r, c, v) in &self.triplets {
            y[r] += v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.dim]; self.dim];
        for &(r, c, v) in &self.triplets {
            m[r][c] += v;
        }
        m
    }

    /// `row,col,value` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,value\n");
        for &(r, c, v) in &self.triplets {
            let _ = writeln!(out, "{r},{c},{v:?}");
        }
        out
    }
}

pub fn assemble_residual(network: &Network, x: &[f64], s: f64) -> Result<Vec<f64>, DimensionMismatch> {
    check_len(network, x.len())?;
    let layout = network.layout();
    let mut f = vec![0.0; layout.len()];
    for (k, e) in network.edges().iter().enumerate() {
        let pi_i = x[layout.potential(e.from)];
        let pi_j = x[layout.potential(e.to)];
        f[k] = match e.device {
            Device::Pipe { beta } => {
                let phi = x[layout.flow(k)];
                pi_i - pi_j - beta * phi * phi.abs().powf(s)
            }
            Device::Compressor { alpha } => crate::eos::gamma_from_alpha(alpha) * pi_i - pi_j,
        };
    }
    for (i, j) in network.junctions().iter().enumerate() {
        let row = layout.potential(i);
        f[row] = match j.boundary {
            Boundary::Slack { potential } => x[row] - potential,
            Boundary::NonSlack { withdrawal } => -withdrawal,
        };
    }
    for (k, e) in network.edges().iter().enumerate() {
        let phi = x[layout.flow(k)];
        if !network.junctions()[e.to].is_slack() {
            f[layout.potential(e.to)] += phi;
        }
        if !network.junctions()[e.from].is_slack() {
            f[layout.potential(e.from)] -= phi;
        }
    }
    Ok(f)
}

/// Jacobian of [`assemble_residual`] with respect to `x`.
///
/// The pipe flow derivative `-beta (1+s) |phi|^s` vanishes at `phi = 0` for
/// `s > 0`; `|phi|` is floored at `epsilon` there so Newton steps stay
/// defined. The residual itself is never regularized.
pub fn assemble_jacobian(
    network: &Network,
    x: &[f64],
    s: f64,
    epsilon: f64,
) -> Result<SparseMatrix, DimensionMismatch> {
    check_len(network, x.len())?;
    let layout = network.layout();
    let mut jac = SparseMatrix::new(layout.len());
    jac.triplets.reserve(4 * network.num_edges() + network.num_junctions());
    for (k, e) in network.edges().iter().enumerate() {
        let (pi_i, pi_j) = (layout.potential(e.from), layout.potential(e.to));
        match e.device {
            Device::Pipe { beta } => {
                let phi = x[layout.flow(k)];
                jac.push(k, layout.flow(k), -beta * (1.0 + s) * phi.abs().max(epsilon).powf(s));
                jac.push(k, pi_i, 1.0);
                jac.push(k, pi_j, -1.0);
            }
            Device::Compressor { alpha } => {
                jac.push(k, pi_i, crate::eos::gamma_from_alpha(alpha));
                jac.push(k, pi_j, -1.0);
            }
        }
    }
    for (i, j) in network.junctions().iter().enumerate() {
        if j.is_slack() {
            jac.push(layout.potential(i), layout.potential(i), 1.0);
        }
    }
    for (k, e) in network.edges().iter().enumerate() {
        if !network.junctions()[e.to].is_slack() {
            jac.push(layout.potential(e.to), layout.flow(k), 1.0);
        }
        if !network.junctions()[e.from].is_slack() {
            jac.push(layout.potential(e.from), layout.flow(k), -1.0);
        }
    }
    Ok(jac)
}
