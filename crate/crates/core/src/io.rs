//! JSON network and solution files.
//!
//! Network file:
//!
//! ```json
//! {"eos": "ideal",
//!  "nodes": [{"id": "s", "slack": true, "potential": 2.0},
//!            {"id": "d", "slack": false, "withdrawal": 2.0}],
//!  "edges": [{"from": "s", "to": "d", "type": "pipe", "beta": 1.0}]}
//! ```
//!
//! A slack node may give `"pressure"` (MPa) instead of `"potential"`; it is
//! converted through the file's equation of state on load. Compressors are
//! `{"type": "compressor", "alpha": ...}`.

use crate::eos::{EosKind, EosParams};
use crate::feasibility::FeasibilityReport;
use crate::network::{Boundary, Device, EdgeSpec, Junction, Network, NetworkDescription};
use crate::residual::StateVector;
use crate::solver::SolveResult;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema error: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: String,
    pub slack: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub withdrawal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum EdgeRecord {
    Pipe { from: String, to: String, beta: f64 },
    Compressor { from: String, to: String, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub eos: EosKind,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl NetworkFile {
    pub fn into_description(self) -> Result<NetworkDescription, IoError> {
        let eos = EosParams::of_kind(self.eos);
        let junctions = self
            .nodes
            .into_iter()
            .map(|n| {
                let boundary = match (n.slack, n.potential, n.pressure, n.withdrawal) {
                    (true, Some(potential), None, None) => Boundary::Slack { potential },
                    (true, None, Some(p), None) => Boundary::Slack {
                        potential: eos.potential(p),
                    },
                    (false, None, None, Some(withdrawal)) => Boundary::NonSlack { withdrawal },
                    (true, ..) => {
                        return Err(IoError::Schema(format!(
                            "slack node '{}' needs exactly one of potential/pressure and no withdrawal",
                            n.id
                        )))
                    }
                    (false, ..) => {
                        return Err(IoError::Schema(format!(
                            "non-slack node '{}' needs a withdrawal and no potential/pressure",
                            n.id
                        )))
                    }
                };
                Ok(Junction { id: n.id, boundary })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let edges = self
            .edges
            .into_iter()
            .map(|e| match e {
                EdgeRecord::Pipe { from, to, beta } => EdgeSpec::pipe(from, to, beta),
                EdgeRecord::Compressor { from, to, alpha } => EdgeSpec::compressor(from, to, alpha),
            })
            .collect();
        Ok(NetworkDescription { eos, junctions, edges })
    }

    pub fn from_description(desc: &NetworkDescription) -> Self {
        NetworkFile {
            eos: desc.eos.kind,
            nodes: desc
                .junctions
                .iter()
                .map(|j| match j.boundary {
                    Boundary::Slack { potential } => NodeRecord {
                        id: j.id.clone(),
                        slack: true,
                        potential: Some(potential),
                        pressure: None,
                        withdrawal: None,
                    },
                    Boundary::NonSlack { withdrawal } => NodeRecord {
                        id: j.id.clone(),
                        slack: false,
                        potential: None,
                        pressure: None,
                        withdrawal: Some(withdrawal),
                    },
                })
                .collect(),
            edges: desc
                .edges
                .iter()
                .map(|e| match e.device {
                    Device::Pipe { beta } => EdgeRecord::Pipe {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        beta,
                    },
                    Device::Compressor { alpha } => EdgeRecord::Compressor {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        alpha,
                    },
                })
                .collect(),
        }
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_network(json: &str) -> Result<NetworkDescription, IoError> {
    serde_json::from_str::<NetworkFile>(json)?.into_description()
}

pub fn read_network(path: &Path) -> Result<NetworkDescription, IoError> {
    parse_network(&read(path)?)
}

pub fn network_to_json(desc: &NetworkDescription) -> String {
    serde_json::to_string_pretty(&NetworkFile::from_description(desc)).expect("plain data serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionNode {
    pub id: String,
    pub potential: f64,
    pub pressure: Option<f64>,
    pub generalized_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionEdge {
    pub from: String,
    pub to: String,
    pub flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: String,
    pub residual_norm: Option<f64>,
    pub nodes: Vec<SolutionNode>,
    pub edges: Vec<SolutionEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<String>,
}

impl SolutionFile {
    pub fn new(network: &Network, result: &SolveResult, report: Option<&FeasibilityReport>) -> Self {
        let state = &result.state;
        let nodes = network
            .junctions()
            .iter()
            .zip(state.potentials())
            .enumerate()
            .map(|(i, (j, &potential))| {
                let entry = report.map(|r| &r.nodes[i]);
                SolutionNode {
                    id: j.id.clone(),
                    potential,
                    pressure: entry.and_then(|e| e.pressure),
                    generalized_only: entry.is_some_and(|e| e.generalized_only),
                }
            })
            .collect();
        let edges = network
            .edges()
            .iter()
            .zip(state.flows())
            .map(|(e, &flow)| SolutionEdge {
                from: network.junctions()[e.from].id.clone(),
                to: network.junctions()[e.to].id.clone(),
                flow,
            })
            .collect();
        SolutionFile {
            status: result.status.as_str().to_string(),
            residual_norm: result.residual_norm.is_finite().then_some(result.residual_norm),
            nodes,
            edges,
            feasibility: report.map(|r| r.overall.as_str().to_string()),
        }
    }

    /// State vector in the network's layout. Nodes are matched by id, edges
    /// by position (their endpoints must agree).
    pub fn to_state(&self, network: &Network) -> Result<StateVector, IoError> {
        if self.nodes.len() != network.num_junctions() || self.edges.len() != network.num_edges() {
            return Err(IoError::Schema(format!(
                "solution has {} nodes / {} edges, network has {} / {}",
                self.nodes.len(),
                self.edges.len(),
                network.num_junctions(),
                network.num_edges()
            )));
        }
        let mut potentials = vec![f64::NAN; network.num_junctions()];
        for n in &self.nodes {
            let i = network
                .junction_index(&n.id)
                .ok_or_else(|| IoError::Schema(format!("solution node '{}' not in network", n.id)))?;
            potentials[i] = n.potential;
        }
        if potentials.iter().any(|p| p.is_nan()) {
            return Err(IoError::Schema("solution repeats a node id".into()));
        }
        let mut flows = Vec::with_capacity(self.edges.len());
        for (k, (rec, e)) in self.edges.iter().zip(network.edges()).enumerate() {
            let (from, to) = (&network.junctions()[e.from].id, &network.junctions()[e.to].id);
            if &rec.from != from || &rec.to != to {
                return Err(IoError::Schema(format!(
                    "solution edge {k} is {}->{}, network edge is {from}->{to}",
                    rec.from, rec.to
                )));
            }
            flows.push(rec.flow);
        }
        Ok(StateVector::from_parts(&flows, &potentials))
    }
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, IoError> {
    Ok(serde_json::from_str(&read(path)?)?)
}
