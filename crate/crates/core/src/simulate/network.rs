// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::seq::index::sample_weighted;
use rand::Rng;

use super::{draw_sequence, Attachment, Family, ObjectSequence, SbmStage, ScenarioSpec};
use crate::error::{Error, Result};
use crate::metrics::{MetricObject, SymMatrix};

/// Simple undirected graph as adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub neighbours: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(nodes: usize) -> Self {
        Self {
            neighbours: vec![Vec::new(); nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.neighbours.len()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        debug_assert!(a != b && !self.neighbours[a].contains(&b));
        self.neighbours[a].push(b);
        self.neighbours[b].push(a);
    }

    pub fn degree(&self, a: usize) -> usize {
        self.neighbours[a].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbours.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// `L = D - A`.
pub fn laplacian(g: &Graph) -> SymMatrix {
    let n = g.nodes();
    let diag = (0..n).map(|a| g.degree(a) as f64).collect();
    let mut upper = vec![0.0; n * n.saturating_sub(1) / 2];
    for (a, adj) in g.neighbours.iter().enumerate() {
        let row = a * (2 * n - a - 1) / 2;
        for &b in adj.iter().filter(|&&b| b > a) {
            upper[row + b - a - 1] = -1.0;
        }
    }
    SymMatrix::from_parts(diag, upper).expect("triangle length matches the node count")
}

/// Grows a preferential attachment graph from a three-node path. Each new
/// node joins `edges` distinct existing nodes, chosen without replacement
/// with probability proportional to `(degree + offset)^gamma`.
pub fn grow_pa_graph(nodes: usize, gamma: f64, attachment: Attachment, rng: &mut impl Rng) -> Graph {
    let mut g = Graph::empty(nodes);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    for t in 3..nodes {
        let weight = |a: usize| (g.degree(a) as f64 + attachment.offset).powf(gamma);
        let chosen = sample_weighted(rng, t, weight, attachment.edges.min(t))
            .expect("attachment weights are positive and finite");
        for a in chosen.iter() {
            g.add_edge(t, a);
        }
    }
    g
}

/// One draw from a block model: independent edges within and across
/// communities laid out contiguously by `stage.sizes`.
pub fn sample_sbm(stage: &SbmStage, rng: &mut impl Rng) -> Graph {
    let community: Vec<usize> = stage
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
        .collect();
    let n = community.len();
    let mut g = Graph::empty(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < stage.block_probs[community[a]][community[b]] {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// Laplacians of preferential attachment graphs: exponent 0 before the
/// change and `effect` after it.
pub fn gen_pa_networks(spec: &ScenarioSpec) -> Result<ObjectSequence> {
    if spec.family != Family::PaNetwork {
        return Err(Error::config(format!(
            "network generator called with a {} scenario",
            spec.family.name()
        )));
    }
    let nodes = spec.dim();
    let gamma = [0.0, spec.effect];
    draw_sequence(spec, |segment, rng| {
        let g = grow_pa_graph(nodes, gamma[segment.min(1)], spec.attachment, rng);
        MetricObject::SymMatrix(laplacian(&g))
    })
}

/// Laplacians of block model graphs, one regime per segment.
pub fn gen_sbm_sequence(spec: &ScenarioSpec) -> Result<ObjectSequence> {
    if spec.family != Family::SbmMulti {
        return Err(Error::config(format!(
            "block model generator called with a {} scenario",
            spec.family.name()
        )));
    }
    let stages = spec.sbm_stages();
    draw_sequence(spec, |segment, rng| {
        MetricObject::SymMatrix(laplacian(&sample_sbm(&stages[segment], rng)))
    })
}
