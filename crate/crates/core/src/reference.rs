//! Independent solutions for trees and single-cycle networks.
//!
//! On a tree anchored at one slack junction the balance equations fix every
//! flow (accumulate withdrawals from the leaves up) and the edge equations
//! then fix every potential (propagate from the slack down). A single cycle
//! adds one unknown, the loop flow `t` on a chosen cycle pipe: removing that
//! pipe leaves a tree, and the pipe's own equation becomes a scalar closure
//! condition `g(t) = 0` with `g` strictly increasing, solved by bisection.
//!
//! None of this shares code with the residual/Jacobian path, which is the
//! point: these are the oracles the continuation solver is checked against.

use crate::bounds::{compute_bounds, BoundsMode};
use crate::eos::gamma_from_alpha;
use crate::network::{Boundary, Device, Network};
use crate::residual::StateVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("network is not a tree: {0}")]
    NotATree(String),
    #[error("oracle requires exactly one slack node, found {0}")]
    MultipleSlackNodes(usize),
    #[error("network is not a single pipe cycle with tree appendages: {0}")]
    NotSingleCycle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Tree,
    CycleBisection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub state: StateVector,
    pub method: OracleMethod,
}

/// Closure tolerance for the loop-flow bisection.
pub const CLOSURE_TOL: f64 = 1e-12;

fn single_slack(network: &Network) -> Result<usize, OracleError> {
    let slacks: Vec<usize> = network.slack_nodes().map(|(i, _)| i).collect();
    match slacks.as_slice() {
        [root] => Ok(*root),
        _ => Err(OracleError::MultipleSlackNodes(slacks.len())),
    }
}

/// Spanning tree rooted at the slack node, with one edge optionally left out.
struct RootedTree {
    /// Junctions in breadth-first order from the root.
    order: Vec<usize>,
    /// Edge to the parent, `None` for the root.
    parent_edge: Vec<Option<usize>>,
}

fn rooted_tree(network: &Network, root: usize, skip: Option<usize>) -> Result<RootedTree, OracleError> {
    let n = network.num_junctions();
    let used = network.num_edges() - usize::from(skip.is_some());
    if used + 1 != n {
        return Err(OracleError::NotATree(format!(
            "{n} junctions need {} edges, found {used}",
            n.saturating_sub(1)
        )));
    }
    let incidence = network.incidence();
    let mut parent_edge = vec![None; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    visited[root] = true;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &k in &incidence[u] {
            if Some(k) == skip {
                continue;
            }
            let e = &network.edges()[k];
            let v = if e.from == u { e.to } else { e.from };
            if !visited[v] {
                visited[v] = true;
                parent_edge[v] = Some(k);
                order.push(v);
            }
        }
    }
    if order.len() != n {
        return Err(OracleError::NotATree("graph is disconnected".into()));
    }
    Ok(RootedTree { order, parent_edge })
}

fn withdrawal(network: &Network, i: usize) -> f64 {
    match network.junctions()[i].boundary {
        Boundary::NonSlack { withdrawal } => withdrawal,
        Boundary::Slack { .. } => 0.0,
    }
}

/// Flows and potentials on `tree`, with `loop_flow = (edge, t)` fixing the
/// flow on the edge that was left out.
fn propagate(network: &Network, root: usize, tree: &RootedTree, loop_flow: Option<(usize, f64)>) -> StateVector {
    let n = network.num_junctions();
    let mut demand: Vec<f64> = (0..n).map(|i| withdrawal(network, i)).collect();
    let mut flows = vec![0.0; network.num_edges()];
    if let Some((k, t)) = loop_flow {
        let e = &network.edges()[k];
        flows[k] = t;
        demand[e.from] += t;
        demand[e.to] -= t;
    }

    // Leaves up: each junction's subtree demand flows in through its parent
    // edge.
    for &v in tree.order.iter().rev() {
        if let Some(k) = tree.parent_edge[v] {
            let e = &network.edges()[k];
            let parent = if e.to == v { e.from } else { e.to };
            flows[k] = if e.to == v { demand[v] } else { -demand[v] };
            demand[parent] += demand[v];
        }
    }

    // Root down.
    let mut potentials = vec![0.0; n];
    potentials[root] = match network.junctions()[root].boundary {
        Boundary::Slack { potential } => potential,
        Boundary::NonSlack { .. } => unreachable!("root is the slack node"),
    };
    for &v in tree.order.iter().skip(1) {
        let k = tree.parent_edge[v].expect("non-root has a parent");
        let e = &network.edges()[k];
        let downstream = e.to == v;
        let parent = if downstream { e.from } else { e.to };
        let pi_parent = potentials[parent];
        potentials[v] = match (e.device, downstream) {
            (Device::Pipe { beta }, true) => pi_parent - beta * flows[k] * flows[k].abs(),
            (Device::Pipe { beta }, false) => pi_parent + beta * flows[k] * flows[k].abs(),
            (Device::Compressor { alpha }, true) => gamma_from_alpha(alpha) * pi_parent,
            (Device::Compressor { alpha }, false) => pi_parent / gamma_from_alpha(alpha),
        };
    }
    StateVector::from_parts(&flows, &potentials)
}

/// Exact solution on a tree with a single slack node.
pub fn tree_solve(network: &Network) -> Result<OracleSolution, OracleError> {
    let root = single_slack(network)?;
    let tree = rooted_tree(network, root, None)?;
    Ok(OracleSolution {
        state: propagate(network, root, &tree, None),
        method: OracleMethod::Tree,
    })
}

/// Edges on the unique cycle, found by stripping leaves.
fn cycle_edges(network: &Network) -> Vec<usize> {
    let incidence = network.incidence();
    let mut degree: Vec<usize> = incidence.iter().map(Vec::len).collect();
    let mut removed = vec![false; network.num_edges()];
    let mut stack: Vec<usize> = (0..degree.len()).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = stack.pop() {
        for &k in &incidence[v] {
            if removed[k] {
                continue;
            }
            removed[k] = true;
            let e = &network.edges()[k];
            let u = if e.from == v { e.to } else { e.from };
            degree[v] -= 1;
            degree[u] -= 1;
            if degree[u] == 1 {
                stack.push(u);
            }
        }
    }
    (0..network.num_edges()).filter(|&k| !removed[k]).collect()
}

/// Solution of a network made of one cycle of pipes plus tree appendages,
/// anchored at a single slack node.
pub fn cycle_bisect(network: &Network) -> Result<OracleSolution, OracleError> {
    let root = single_slack(network)?;
    if network.num_edges() != network.num_junctions() {
        return Err(OracleError::NotSingleCycle(format!(
            "{} edges on {} junctions",
            network.num_edges(),
            network.num_junctions()
        )));
    }
    let cycle = cycle_edges(network);
    if cycle.is_empty() {
        return Err(OracleError::NotSingleCycle("no cycle found".into()));
    }
    if let Some(&k) = cycle.iter().find(|&&k| !network.edges()[k].device.is_pipe()) {
        return Err(OracleError::NotSingleCycle(format!("cycle edge {k} is a compressor")));
    }
    let closing = cycle[0];
    let tree = rooted_tree(network, root, Some(closing))
        .map_err(|e| OracleError::NotSingleCycle(e.to_string()))?;
    let e = network.edges()[closing];
    let beta = match e.device {
        Device::Pipe { beta } => beta,
        Device::Compressor { .. } => unreachable!(),
    };

    // g(t): head loss of the closing pipe minus the potential drop across it
    // implied by the tree; strictly increasing in t.
    let g = |t: f64| {
        let x = propagate(network, root, &tree, Some((closing, t)));
        let pi = x.potentials();
        (beta * t * t.abs() - (pi[e.from] - pi[e.to]), x)
    };

    let phi_m = compute_bounds(network, BoundsMode::Safe).phi_m;
    let mut half = if phi_m > 0.0 { phi_m } else { 1.0 };
    let (mut lo, mut hi) = (-half, half);
    for _ in 0..200 {
        if g(lo).0 <= 0.0 && g(hi).0 >= 0.0 {
            break;
        }
        half *= 2.0;
        lo = -half;
        hi = half;
    }

    let (g_lo, x_lo) = g(lo);
    if g_lo.abs() <= CLOSURE_TOL {
        return Ok(OracleSolution { state: x_lo, method: OracleMethod::CycleBisection });
    }
    let (g_hi, x_hi) = g(hi);
    if g_hi.abs() <= CLOSURE_TOL {
        return Ok(OracleSolution { state: x_hi, method: OracleMethod::CycleBisection });
    }
    let mut best = (f64::INFINITY, x_lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        let (gm, xm) = g(mid);
        if gm.abs() < best.0 {
            best = (gm.abs(), xm);
        }
        if gm.abs() <= CLOSURE_TOL || mid <= lo || mid >= hi {
            break;
        }
        if gm > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(OracleSolution {
        state: best.1,
        method: OracleMethod::CycleBisection,
    })
}

/// Picks the oracle matching the network's topology.
pub fn oracle_solve(network: &Network) -> Result<OracleSolution, OracleError> {
    if network.num_edges() + 1 == network.num_junctions() {
        tree_solve(network)
    } else {
        cycle_bisect(network)
    }
}
