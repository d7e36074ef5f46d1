//! Pressure recovery and physical feasibility of a generalized solution.
//!
//! A solution is feasible when every junction has a non-negative pressure
//! and every compressor carries non-negative flow (flow in the boost
//! direction). Under the ideal gas a negative potential has no real pressure
//! at all; under CNGA every potential has a real pressure, possibly negative.

use crate::eos::{EosError, EosKind};
use crate::network::Network;
use crate::residual::{DimensionMismatch, StateVector};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Overall {
    Feasible,
    Infeasible,
    NoPressureSolution,
}

impl Overall {
    pub fn as_str(&self) -> &'static str {
        match self {
            Overall::Feasible => "Feasible",
            Overall::Infeasible => "Infeasible",
            Overall::NoPressureSolution => "NoPressureSolution",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeEntry {
    pub id: String,
    pub potential: f64,
    /// `None` when no real pressure exists.
    pub pressure: Option<f64>,
    pub generalized_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressorEntry {
    pub edge: usize,
    pub from: String,
    pub to: String,
    pub flow: f64,
    pub sign_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Reason {
    NoRealPressure { node: String, potential: f64 },
    NegativePressure { node: String, pressure: f64 },
    ReverseCompressorFlow { edge: usize, flow: f64 },
}

impl std::fmt::Display for Reason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reason::NoRealPressure { node, potential } => {
                write!(f, "node {node} potential {potential} has no real pressure")
            }
            Reason::NegativePressure { node, pressure } => {
                write!(f, "node {node} pressure {pressure} is negative")
            }
            Reason::ReverseCompressorFlow { edge, flow } => {
                write!(f, "compressor {edge} carries reverse flow {flow}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub overall: Overall,
    pub nodes: Vec<NodeEntry>,
    pub compressors: Vec<CompressorEntry>,
    pub reasons: Vec<Reason>,
}

impl FeasibilityReport {
    pub fn summary(&self) -> String {
        let mut out = format!("overall: {}\n", self.overall.as_str());
        for r in &self.reasons {
            out.push_str(&format!("  - {r}\n"));
        }
        out
    }
}

/// Classifies a (converged) solution. The residual is not re-checked.
pub fn classify(network: &Network, solution: &StateVector) -> Result<FeasibilityReport, DimensionMismatch> {
    let expected = network.layout().len();
    if solution.len() != expected {
        return Err(DimensionMismatch {
            expected,
            actual: solution.len(),
        });
    }
    let eos = network.eos();
    let mut reasons = Vec::new();
    let mut no_pressure = false;
    let mut nodes = Vec::with_capacity(network.num_junctions());
    for (j, &potential) in network.junctions().iter().zip(solution.potentials()) {
        let entry = match eos.pressure_from_potential(potential) {
            Ok(p) => {
                if p.value < 0.0 {
                    reasons.push(Reason::NegativePressure {
                        node: j.id.clone(),
                        pressure: p.value,
                    });
                }
                NodeEntry {
                    id: j.id.clone(),
                    potential,
                    pressure: Some(p.value),
                    generalized_only: p.generalized_only,
                }
            }
            Err(EosError::NoRealPressure { .. }) | Err(EosError::Domain(_)) => {
                no_pressure = true;
                reasons.push(Reason::NoRealPressure {
                    node: j.id.clone(),
                    potential,
                });
                NodeEntry {
                    id: j.id.clone(),
                    potential,
                    pressure: None,
                    generalized_only: false,
                }
            }
        };
        nodes.push(entry);
    }

    let mut compressors = Vec::new();
    for (k, e) in network.compressors() {
        let flow = solution.flows()[k];
        let sign_ok = flow >= 0.0;
        if !sign_ok {
            reasons.push(Reason::ReverseCompressorFlow { edge: k, flow });
        }
        compressors.push(CompressorEntry {
            edge: k,
            from: network.junctions()[e.from].id.clone(),
            to: network.junctions()[e.to].id.clone(),
            flow,
            sign_ok,
        });
    }

    let overall = if no_pressure && eos.kind == EosKind::Ideal {
        Overall::NoPressureSolution
    } else if reasons.is_empty() {
        Overall::Feasible
    } else {
        Overall::Infeasible
    };
    Ok(FeasibilityReport {
        overall,
        nodes,
        compressors,
        reasons,
    })
}
