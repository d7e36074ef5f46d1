//! A priori hypercube containing every solution of the potential system.
//!
//! With `beta_m` the largest pipe resistance, `alpha_m` the largest compressor
//! ratio, `phi_m = max|q*| * |N_ns|` and
//!
//! ```text
//! pi_m = (max_slack |pi*| + |P| beta_m phi_m^2) * alpha_m^|C|
//! ```
//!
//! the open cube `|x_i| < L = max(phi_m, pi_m)` bounds all unknowns.
//! Potentials across a compressor scale by `gamma = alpha^2`, so
//! [`BoundsMode::Safe`] replaces `alpha_m` with `gamma_m = max gamma`. The
//! solver's boundary diagnostic always uses the safe cube.
//!
//! The flow estimate assumes every flow is routed from a slack node to the
//! withdrawals. That fails when two slack nodes share a component (their
//! potential difference drives flow through the network) or when a
//! compressor sits on a cycle (it pumps gas around the loop). In both cases
//! solutions can leave the cube; see [`bound_is_guaranteed`]. Even where it
//! holds, the cube is attained rather than strictly avoided in degenerate
//! cases: with no withdrawals and no compressors the slack potential itself
//! equals `L`.

use crate::network::{Boundary, Device, Network};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsMode {
    Paper,
    Safe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBounds {
    pub beta_m: f64,
    pub alpha_m: f64,
    pub gamma_m: f64,
    pub phi_m: f64,
    pub pi_m: f64,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub mode: BoundsMode,
}

impl DomainBounds {
    /// True when every component lies strictly inside the cube.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() < self.half_width)
    }
}

pub fn compute_bounds(network: &Network, mode: BoundsMode) -> DomainBounds {
    let mut beta_m: f64 = 0.0;
    let mut n_pipes = 0usize;
    for (_, e) in network.pipes() {
        if let Device::Pipe { beta } = e.device {
            beta_m = beta_m.max(beta);
            n_pipes += 1;
        }
    }
    let mut alpha_m: f64 = 1.0;
    let mut n_comp = 0i32;
    for (_, e) in network.compressors() {
        if let Device::Compressor { alpha } = e.device {
            alpha_m = alpha_m.max(alpha);
            n_comp += 1;
        }
    }
    let gamma_m = crate::eos::gamma_from_alpha(alpha_m);

    let mut q_max: f64 = 0.0;
    let mut n_ns = 0usize;
    let mut pi_star_max: f64 = 0.0;
    for j in network.junctions() {
        match j.boundary {
            Boundary::NonSlack { withdrawal } => {
                q_max = q_max.max(withdrawal.abs());
                n_ns += 1;
            }
            Boundary::Slack { potential } => pi_star_max = pi_star_max.max(potential.abs()),
        }
    }
    let phi_m = q_max * n_ns as f64;
    let ratio = match mode {
        BoundsMode::Paper => alpha_m,
        BoundsMode::Safe => gamma_m,
    };
    let pi_m = (pi_star_max + n_pipes as f64 * beta_m * phi_m * phi_m) * ratio.powi(n_comp);
    DomainBounds {
        beta_m,
        alpha_m,
        gamma_m,
        phi_m,
        pi_m,
        half_width: phi_m.max(pi_m),
        mode,
    }
}

/// True when the safe cube provably contains every solution: each connected
/// component has exactly one slack node and no compressor lies on a cycle.
///
/// Then a circulating flow would need the potential to drop strictly around
/// a loop of pipes, so flows are acyclic and bounded by the withdrawals.
pub fn bound_is_guaranteed(network: &Network) -> bool {
    for comp in network.components() {
        let slacks = comp
            .iter()
            .filter(|&&v| matches!(network.junctions()[v].boundary, Boundary::Slack { .. }))
            .count();
        if slacks != 1 {
            return false;
        }
    }
    let bridges = bridges(network);
    network.compressors().all(|(k, _)| bridges[k])
}

/// Half-width that holds for the whole continuation `0 <= s <= 1` (closed
/// cube) when [`bound_is_guaranteed`]. Pipe drops are `beta |phi|^(1+s)`,
/// which for `phi_m < 1` peaks at `s = 0`.
pub fn path_half_width(network: &Network) -> f64 {
    let b = compute_bounds(network, BoundsMode::Safe);
    let n_pipes = network.pipes().count() as f64;
    let n_comp = network.compressors().count() as i32;
    let pi_star_max = network
        .junctions()
        .iter()
        .filter_map(|j| match j.boundary {
            Boundary::Slack { potential } => Some(potential.abs()),
            Boundary::NonSlack { .. } => None,
        })
        .fold(0.0_f64, f64::max);
    let drop = b.phi_m.max(b.phi_m * b.phi_m);
    let pi_path = (pi_star_max + n_pipes * b.beta_m * drop) * b.gamma_m.powi(n_comp);
    b.half_width.max(pi_path)
}

/// `bridges[k]` is true when removing edge `k` disconnects its endpoints.
/// Parallel edges are never bridges.
fn bridges(network: &Network) -> Vec<bool> {
    let n = network.num_junctions();
    let edges = network.edges();
    let inc = network.incidence();
    let mut is_bridge = vec![false; edges.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        // (vertex, edge used to enter it, next incidence position)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        while let Some(&mut (v, via, ref mut pos)) = stack.last_mut() {
            if *pos < inc[v].len() {
                let k = inc[v][*pos];
                *pos += 1;
                if k == via {
                    continue;
                }
                let w = if edges[k].from == v { edges[k].to } else { edges[k].from };
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, k, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] > disc[u] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge
}
