//! Seeded random admissible networks for regression and acceptance runs.
//!
//! Compressors are only ever placed on spanning-tree edges, so the
//! compressor-only subgraph is a forest by construction; slack nodes are
//! drawn from distinct compressor trees.

use crate::eos::EosParams;
use crate::network::{EdgeSpec, Junction, Network, NetworkDescription};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Random recursive tree, one slack node.
    Tree,
    /// Tree plus extra pipes, one to three slack nodes.
    Mesh,
    /// One cycle of pipes with tree appendages, one slack node.
    SingleCycle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub topology: Topology,
    pub nodes: usize,
    /// Upper bound on the fraction of edges that are compressors.
    pub max_compressor_fraction: f64,
    pub max_slacks: usize,
    pub eos: EosParams,
}

impl GeneratorSpec {
    pub fn new(topology: Topology, nodes: usize) -> Self {
        Self {
            topology,
            nodes,
            max_compressor_fraction: 0.2,
            max_slacks: if topology == Topology::Mesh { 3 } else { 1 },
            eos: EosParams::ideal(),
        }
    }
}

fn id(i: usize) -> String {
    format!("n{i}")
}

struct Draft {
    /// `(from, to, is_tree_edge)`
    edges: Vec<(usize, usize, bool)>,
}

fn recursive_tree(rng: &mut ChaCha8Rng, first: usize, n: usize, draft: &mut Draft) {
    for k in first.max(1)..n {
        let parent = rng.gen_range(0..k);
        let (a, b) = if rng.gen_bool(0.8) { (parent, k) } else { (k, parent) };
        draft.edges.push((a, b, true));
    }
}

/// Builds a random admissible network. Panics if `spec.nodes == 0`.
pub fn random_network(spec: &GeneratorSpec, seed: u64) -> Network {
    assert!(spec.nodes > 0, "network needs at least one junction");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.nodes;
    let mut draft = Draft { edges: Vec::new() };

    match spec.topology {
        Topology::Tree => recursive_tree(&mut rng, 1, n, &mut draft),
        Topology::Mesh => {
            recursive_tree(&mut rng, 1, n, &mut draft);
            if n >= 2 {
                let extra = (n as f64 * rng.gen_range(0.1..0.4)).round() as usize;
                for _ in 0..extra.max(1) {
                    let u = rng.gen_range(0..n);
                    let mut v = rng.gen_range(0..n - 1);
                    if v >= u {
                        v += 1;
                    }
                    draft.edges.push((u, v, false));
                }
            }
        }
        Topology::SingleCycle => {
            let c = n.min(3 + rng.gen_range(0..8)).max(3.min(n));
            if c >= 3 {
                for i in 0..c {
                    draft.edges.push((i, (i + 1) % c, false));
                }
            } else {
                for i in 1..c {
                    draft.edges.push((i - 1, i, true));
                }
            }
            recursive_tree(&mut rng, c, n, &mut draft);
        }
    }

    // Compressors on tree edges only, oriented away from the smaller index.
    let max_comp = (spec.max_compressor_fraction * draft.edges.len() as f64).floor() as usize;
    let target = if max_comp == 0 { 0 } else { rng.gen_range(0..=max_comp) };
    let mut tree_edges: Vec<usize> = (0..draft.edges.len()).filter(|&k| draft.edges[k].2).collect();
    tree_edges.shuffle(&mut rng);
    let mut is_comp = vec![false; draft.edges.len()];
    for &k in tree_edges.iter().take(target) {
        is_comp[k] = true;
        let (a, b, t) = draft.edges[k];
        draft.edges[k] = (a.min(b), a.max(b), t);
    }

    // Slack nodes from distinct compressor trees.
    let mut comp_root: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (k, &(a, b, _)) in draft.edges.iter().enumerate() {
        if is_comp[k] {
            let (ra, rb) = (find(&mut comp_root, a), find(&mut comp_root, b));
            comp_root[ra] = rb;
        }
    }
    let n_slack = rng.gen_range(1..=spec.max_slacks.max(1)).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut taken = std::collections::HashSet::new();
    let mut slack = vec![false; n];
    let mut count = 0;
    for v in order {
        if count == n_slack {
            break;
        }
        if taken.insert(find(&mut comp_root, v)) {
            slack[v] = true;
            count += 1;
        }
    }

    let scale = 5.0 / n as f64;
    let junctions = (0..n)
        .map(|i| {
            if slack[i] {
                Junction::slack(id(i), rng.gen_range(10.0..50.0))
            } else if rng.gen_bool(0.2) {
                Junction::nonslack(id(i), 0.0)
            } else {
                Junction::nonslack(id(i), scale * rng.gen_range(-0.3..1.0))
            }
        })
        .collect();
    let edges = draft
        .edges
        .iter()
        .enumerate()
        .map(|(k, &(a, b, _))| {
            if is_comp[k] {
                EdgeSpec::compressor(id(a), id(b), rng.gen_range(1.05..1.4))
            } else {
                EdgeSpec::pipe(id(a), id(b), rng.gen_range(0.05..0.5))
            }
        })
        .collect();

    NetworkDescription {
        eos: spec.eos,
        junctions,
        edges,
    }
    .validate()
    .expect("generator produces admissible networks")
}
