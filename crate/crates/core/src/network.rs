//! Network data model and admissibility checks.
//!
//! A [`NetworkDescription`] is the raw, id-based form read from disk. It
//! becomes a [`Network`] only through [`NetworkDescription::validate`], which
//! resolves ids to indices and enforces the admissibility assumptions:
//!
//! * at least one slack junction,
//! * no path between two slack junctions made of compressors only,
//! * no cycle made of compressors only,
//! * every connected component anchored by a slack junction.
//!
//! The last two structural checks are expressed on the compressor-only
//! subgraph: it must be a forest with at most one slack junction per tree.

use crate::eos::{gamma_from_alpha, EosParams};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    /// Prescribed potential.
    Slack { potential: f64 },
    /// Prescribed withdrawal: inflow minus outflow at the junction.
    NonSlack { withdrawal: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub id: String,
    pub boundary: Boundary,
}

impl Junction {
    pub fn slack(id: impl Into<String>, potential: f64) -> Self {
        Self {
            id: id.into(),
            boundary: Boundary::Slack { potential },
        }
    }

    pub fn nonslack(id: impl Into<String>, withdrawal: f64) -> Self {
        Self {
            id: id.into(),
            boundary: Boundary::NonSlack { withdrawal },
        }
    }

    pub fn is_slack(&self) -> bool {
        matches!(self.boundary, Boundary::Slack { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Device {
    Pipe { beta: f64 },
    Compressor { alpha: f64 },
}

impl Device {
    pub fn is_pipe(&self) -> bool {
        matches!(self, Device::Pipe { .. })
    }

    pub fn is_compressor(&self) -> bool {
        matches!(self, Device::Compressor { .. })
    }
}

/// Edge referring to junctions by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub device: Device,
}

impl EdgeSpec {
    pub fn pipe(from: impl Into<String>, to: impl Into<String>, beta: f64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            device: Device::Pipe { beta },
        }
    }

    pub fn compressor(from: impl Into<String>, to: impl Into<String>, alpha: f64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            device: Device::Compressor { alpha },
        }
    }
}

/// Edge with resolved junction indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub device: Device,
}

impl Edge {
    /// Potential ratio for compressors, `None` for pipes.
    pub fn gamma(&self) -> Option<f64> {
        match self.device {
            Device::Compressor { alpha } => Some(gamma_from_alpha(alpha)),
            Device::Pipe { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum Violation {
    #[error("network has no slack node")]
    NoSlackNode,
    #[error("slack nodes {first} and {second} are joined by a path of compressors only")]
    CompressorOnlySlackPath { first: String, second: String },
    #[error("compressors {edges:?} close a cycle without any pipe")]
    CompressorOnlyCycle { edges: Vec<usize> },
    #[error("edge {edge} references unknown junction '{id}'")]
    DanglingEdge { edge: usize, id: String },
    #[error("junction id '{id}' is used more than once")]
    DuplicateId { id: String },
    #[error("pipe {edge} has non-positive resistance {beta}")]
    NonPositiveResistance { edge: usize, beta: f64 },
    #[error("compressor {edge} has ratio {alpha} < 1")]
    CompressorRatioBelowOne { edge: usize, alpha: f64 },
    #[error("edge {edge} is a self-loop on '{id}'")]
    SelfLoop { edge: usize, id: String },
    #[error("junction '{id}' has a non-finite boundary value")]
    NonFiniteBoundary { id: String },
    #[error("component containing '{representative}' ({size} junctions) has no slack node")]
    DisconnectedGraph { representative: String, size: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("network failed validation with {} violation(s)", .0.len())]
pub struct ValidationErrors(pub Vec<Violation>);

/// Raw network as read from input.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDescription {
    pub eos: EosParams,
    pub junctions: Vec<Junction>,
    pub edges: Vec<EdgeSpec>,
}

/// A validated, immutable network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    eos: EosParams,
    junctions: Vec<Junction>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

impl NetworkDescription {
    /// Checks the description and returns every violation found.
    pub fn validate(&self) -> Result<Network, ValidationErrors> {
        let mut violations = Vec::new();

        let mut index = HashMap::with_capacity(self.junctions.len());
        for (i, j) in self.junctions.iter().enumerate() {
            if index.insert(j.id.clone(), i).is_some() {
                violations.push(Violation::DuplicateId { id: j.id.clone() });
            }
            let value = match j.boundary {
                Boundary::Slack { potential } => potential,
                Boundary::NonSlack { withdrawal } => withdrawal,
            };
            if !value.is_finite() {
                violations.push(Violation::NonFiniteBoundary { id: j.id.clone() });
            }
        }
        if !self.junctions.iter().any(Junction::is_slack) {
            violations.push(Violation::NoSlackNode);
        }

        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            match e.device {
                Device::Pipe { beta } if !(beta > 0.0 && beta.is_finite()) => {
                    violations.push(Violation::NonPositiveResistance { edge: k, beta });
                }
                Device::Compressor { alpha } if !(alpha >= 1.0 && alpha.is_finite()) => {
                    violations.push(Violation::CompressorRatioBelowOne { edge: k, alpha });
                }
                _ => {}
            }
            let from = index.get(&e.from).copied();
            let to = index.get(&e.to).copied();
            for (id, found) in [(&e.from, from), (&e.to, to)] {
                if found.is_none() {
                    violations.push(Violation::DanglingEdge {
                        edge: k,
                        id: id.clone(),
                    });
                }
            }
            if let (Some(from), Some(to)) = (from, to) {
                if from == to {
                    violations.push(Violation::SelfLoop {
                        edge: k,
                        id: e.from.clone(),
                    });
                } else {
                    edges.push((k, Edge { from, to, device: e.device }));
                }
            }
        }

        // Compressor-only subgraph: must be a forest with at most one slack
        // node per tree.
        let n = self.junctions.len();
        let mut comp = DisjointSet::new(n);
        let mut comp_edges: Vec<(usize, usize, usize)> = Vec::new();
        for &(k, e) in &edges {
            if e.device.is_compressor() {
                if !comp.union(e.from, e.to) {
                    violations.push(Violation::CompressorOnlyCycle {
                        edges: compressor_cycle(&comp_edges, e.from, e.to, k),
                    });
                } else {
                    comp_edges.push((k, e.from, e.to));
                }
            }
        }
        let mut slack_of_tree: HashMap<usize, usize> = HashMap::new();
        for (i, j) in self.junctions.iter().enumerate() {
            if j.is_slack() {
                let root = comp.find(i);
                if let Some(&other) = slack_of_tree.get(&root) {
                    violations.push(Violation::CompressorOnlySlackPath {
                        first: self.junctions[other].id.clone(),
                        second: j.id.clone(),
                    });
                } else {
                    slack_of_tree.insert(root, i);
                }
            }
        }

        // Connectivity: every component needs its own slack node.
        if self.junctions.iter().any(Junction::is_slack) {
            let mut all = DisjointSet::new(n);
            for &(_, e) in &edges {
                all.union(e.from, e.to);
            }
            let mut anchored = vec![false; n];
            for (i, j) in self.junctions.iter().enumerate() {
                if j.is_slack() {
                    let r = all.find(i);
                    anchored[r] = true;
                }
            }
            let mut sizes: HashMap<usize, (usize, usize)> = HashMap::new();
            for i in 0..n {
                let r = all.find(i);
                sizes.entry(r).or_insert((i, 0)).1 += 1;
            }
            let mut unanchored: Vec<_> = sizes
                .into_iter()
                .filter(|(r, _)| !anchored[*r])
                .map(|(_, v)| v)
                .collect();
            unanchored.sort_unstable();
            for (first, size) in unanchored {
                violations.push(Violation::DisconnectedGraph {
                    representative: self.junctions[first].id.clone(),
                    size,
                });
            }
        }

        if !violations.is_empty() {
            return Err(ValidationErrors(violations));
        }
        Ok(Network {
            eos: self.eos,
            junctions: self.junctions.clone(),
            edges: edges.into_iter().map(|(_, e)| e).collect(),
            index,
        })
    }

    /// Resolves ids without any admissibility check.
    ///
    /// Only intended for exercising solver failure paths on networks that
    /// violate the assumptions. Returns `None` if an id cannot be resolved.
    #[doc(hidden)]
    pub fn build_unchecked(&self) -> Option<Network> {
        let index: HashMap<String, usize> = self
            .junctions
            .iter()
            .enumerate()
            .map(|(i, j)| (j.id.clone(), i))
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Some(Edge {
                    from: *index.get(&e.from)?,
                    to: *index.get(&e.to)?,
                    device: e.device,
                })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Network {
            eos: self.eos,
            junctions: self.junctions.clone(),
            edges,
            index,
        })
    }
}

// Edges on the compressor-forest path from `a` to `b`, plus the closing edge.
fn compressor_cycle(forest: &[(usize, usize, usize)], a: usize, b: usize, closing: usize) -> Vec<usize> {
    let mut adj: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for &(k, u, v) in forest {
        adj.entry(u).or_default().push((v, k));
        adj.entry(v).or_default().push((u, k));
    }
    let mut prev: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut stack = vec![a];
    let mut seen = std::collections::HashSet::from([a]);
    while let Some(u) = stack.pop() {
        if u == b {
            break;
        }
        for &(v, k) in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(v) {
                prev.insert(v, (u, k));
                stack.push(v);
            }
        }
    }
    let mut path = vec![closing];
    let mut cur = b;
    while let Some(&(p, k)) = prev.get(&cur) {
        path.push(k);
        cur = p;
    }
    path.sort_unstable();
    path
}

impl Network {
    pub fn eos(&self) -> &EosParams {
        &self.eos
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_junctions(&self) -> usize {
        self.junctions.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn junction_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn pipes(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.device.is_pipe())
    }

    pub fn compressors(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.device.is_compressor())
    }

    pub fn slack_nodes(&self) -> impl Iterator<Item = (usize, &Junction)> {
        self.junctions.iter().enumerate().filter(|(_, j)| j.is_slack())
    }

    pub fn nonslack_nodes(&self) -> impl Iterator<Item = (usize, &Junction)> {
        self.junctions.iter().enumerate().filter(|(_, j)| !j.is_slack())
    }

    pub fn layout(&self) -> StateLayout {
        StateLayout {
            n_edges: self.edges.len(),
            n_junctions: self.junctions.len(),
        }
    }

    /// Edge indices incident to each junction.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.junctions.len()];
        for (k, e) in self.edges.iter().enumerate() {
            inc[e.from].push(k);
            inc[e.to].push(k);
        }
        inc
    }

    /// Connected components as sorted junction index lists, ordered by their
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.junctions.len();
        let mut ds = DisjointSet::new(n);
        for e in &self.edges {
            ds.union(e.from, e.to);
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..n {
            let r = ds.find(i);
            groups.entry(r).or_default().push(i);
        }
        let mut out: Vec<_> = groups.into_values().collect();
        out.sort_unstable_by_key(|g| g[0]);
        out
    }

    pub fn to_description(&self) -> NetworkDescription {
        NetworkDescription {
            eos: self.eos,
            junctions: self.junctions.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    from: self.junctions[e.from].id.clone(),
                    to: self.junctions[e.to].id.clone(),
                    device: e.device,
                })
                .collect(),
        }
    }
}

/// Positions of the unknowns in a state vector: edge flows first, in edge
/// input order, then junction potentials in junction input order. Residual
/// rows follow the same layout (edge equations, then junction equations).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    pub n_edges: usize,
    pub n_junctions: usize,
}

impl StateLayout {
    pub fn len(&self) -> usize {
        self.n_edges + self.n_junctions
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flow(&self, edge: usize) -> usize {
        debug_assert!(edge < self.n_edges);
        edge
    }

    pub fn potential(&self, junction: usize) -> usize {
        debug_assert!(junction < self.n_junctions);
        self.n_edges + junction
    }

    pub fn flows(&self) -> std::ops::Range<usize> {
        0..self.n_edges
    }

    pub fn potentials(&self) -> std::ops::Range<usize> {
        self.n_edges..self.len()
    }
}
