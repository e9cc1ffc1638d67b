//! Seeded random generators for relations, states and CPM maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cpm::{CpmMap, MixedStateGraph};
use crate::relcore::{FiniteSet, Rel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each pair present with probability `density`.
pub fn random_rel<R: Rng>(dom: &FiniteSet, cod: &FiniteSet, density: f64, rng: &mut R) -> Rel {
    Rel::from_fn(dom.clone(), cod.clone(), |_, _| rng.gen_bool(density))
}

/// Nodes and then edges between chosen nodes, each with probability 1/2.
pub fn random_state<R: Rng>(carrier: &FiniteSet, rng: &mut R) -> MixedStateGraph {
    let nodes: Vec<usize> = (0..carrier.size()).filter(|_| rng.gen_bool(0.5)).collect();
    let mut edges = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            if rng.gen_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    MixedStateGraph::new(carrier.clone(), nodes, edges).expect("edges join chosen nodes")
}

/// A random state with at least one node.
pub fn random_causal_state<R: Rng>(carrier: &FiniteSet, rng: &mut R) -> MixedStateGraph {
    assert!(carrier.size() > 0, "no causal states on the empty set");
    loop {
        let s = random_state(carrier, rng);
        if s.is_causal() {
            return s;
        }
    }
}

/// A CPM map with a random Choi graph.
pub fn random_cpm_map<R: Rng>(dom: &FiniteSet, cod: &FiniteSet, rng: &mut R) -> CpmMap {
    let choi = random_state(&FiniteSet::pair(dom, cod), rng);
    CpmMap::from_graph(dom.clone(), cod.clone(), choi).expect("carrier is dom x cod")
}
