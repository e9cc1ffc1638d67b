//! Decoherence maps of classical structures.
//!
//! `dec(Z)` doubles `comult` and traces one output: relationally it sends
//! `(g, g')` to `(h, h')` when all four lie in one block and
//! `g - g' = h - h'`. On graphs, a node spreads to its whole block, an
//! edge `{g, g'}` inside a block becomes the orbit of the shift `g - g'`,
//! and an edge across blocks disappears.

use std::collections::BTreeSet;

use crate::classical::{AbelianGroupoid, ClassicalStructure};
use crate::cpm::{
    all_states, apply, compose_relational, discard_factors, pure_map, CpmMap, MixedStateGraph,
};
use crate::error::{Error, Result};
use crate::gen;
use crate::relcore::FiniteSet;

/// The edges `{g, g + shift}` over one block, with the block as nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitSubgraph {
    pub block: usize,
    pub shift: usize,
    pub graph: MixedStateGraph,
}

/// `d` or `-d`, whichever is the smaller index; both give one orbit.
pub fn canonical_shift(g: &AbelianGroupoid, d: usize) -> usize {
    d.min(g.neg(d))
}

pub fn orbit_subgraph(g: &AbelianGroupoid, block: usize, shift: usize) -> Result<OrbitSubgraph> {
    let b = g.blocks().get(block).ok_or_else(|| {
        Error::IndexOutOfRange(format!("block {block} of a groupoid with {} blocks", g.block_count()))
    })?;
    if g.block_of(shift) != block {
        return Err(Error::OutOfRange(format!("shift {shift} is not in block {block}")));
    }
    let edges: Vec<(usize, usize)> = b
        .elements
        .iter()
        .map(|&h| (h, g.add(h, shift).expect("same block")))
        .filter(|(a, c)| a != c)
        .collect();
    let graph = MixedStateGraph::new(g.carrier().clone(), b.elements.iter().copied(), edges)?;
    Ok(OrbitSubgraph { block, shift: canonical_shift(g, shift), graph })
}

/// The decoherence map, built from the structure maps.
pub fn decoherence_map(c: &ClassicalStructure) -> CpmMap {
    let z = c.carrier();
    let copy = pure_map(&c.comult);
    let trace = discard_factors(&[z, z], &[false, true]);
    compose_relational(&copy, &trace)
        .and_then(|d| d.with_types(z.clone(), z.clone()))
        .expect("comult then trace is an endomap")
}

/// Orbit subgraphs that decoherence produces from `rho`, one per touched
/// block with shift 0 plus one per distinct intra-block edge difference.
pub fn orbit_components(c: &ClassicalStructure, rho: &MixedStateGraph) -> Result<Vec<OrbitSubgraph>> {
    let g = &c.groupoid;
    if rho.carrier().size() != g.size() {
        return Err(Error::CarrierMismatch(format!(
            "state on {} elements, structure on {}",
            rho.carrier().size(),
            g.size()
        )));
    }
    let mut shifts: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &x in rho.nodes() {
        let l = g.block_of(x);
        shifts.insert((l, g.blocks()[l].unit));
    }
    for &(a, b) in rho.edges() {
        if g.block_of(a) == g.block_of(b) {
            let d = g.sub(a, b).expect("same block");
            shifts.insert((g.block_of(a), canonical_shift(g, d)));
        }
    }
    shifts.into_iter().map(|(l, d)| orbit_subgraph(g, l, d)).collect()
}

/// Decoherence computed from orbit subgraphs.
pub fn decohere_fast(c: &ClassicalStructure, rho: &MixedStateGraph) -> Result<MixedStateGraph> {
    let parts = orbit_components(c, rho)?;
    let mut out = MixedStateGraph::empty(rho.carrier().clone());
    for p in parts {
        out = crate::cpm::convex_combine(&[out, p.graph])?;
    }
    Ok(out)
}

/// Splits a decohered state into per-block parts `tau_l`, each with its
/// block as node set. Fails if some part does not have that shape or an
/// edge crosses blocks.
pub fn decompose_blockwise(c: &ClassicalStructure, sigma: &MixedStateGraph) -> Result<Vec<(usize, MixedStateGraph)>> {
    let g = &c.groupoid;
    let touched: BTreeSet<usize> = sigma.nodes().iter().map(|&x| g.block_of(x)).collect();
    if let Some(&(a, b)) = sigma.edges().iter().find(|&&(a, b)| g.block_of(a) != g.block_of(b)) {
        return Err(Error::VerificationFailure(format!("edge {{{a}, {b}}} crosses blocks")));
    }
    let mut parts = Vec::new();
    for l in touched {
        let block = &g.blocks()[l].elements;
        if !block.iter().all(|x| sigma.has_node(*x)) {
            return Err(Error::VerificationFailure(format!("block {l} only partly present")));
        }
        let edges = sigma.edges().iter().copied().filter(|&(a, _)| g.block_of(a) == l);
        parts.push((l, MixedStateGraph::new(sigma.carrier().clone(), block.iter().copied(), edges)?));
    }
    Ok(parts)
}

/// The classical-point clique `|G_l><G_l|`.
pub fn point_clique(g: &AbelianGroupoid, block: usize) -> MixedStateGraph {
    MixedStateGraph::pure_state(g.carrier().clone(), g.blocks()[block].elements.iter().copied())
        .expect("block elements")
}

/// Whether `sigma` is a union of classical-point cliques.
pub fn is_union_of_point_cliques(g: &AbelianGroupoid, sigma: &MixedStateGraph) -> bool {
    let touched: BTreeSet<usize> = sigma.nodes().iter().map(|&x| g.block_of(x)).collect();
    let points: Vec<MixedStateGraph> = touched.iter().map(|&l| point_clique(g, l)).collect();
    match crate::cpm::convex_combine(&points) {
        Ok(u) => u == *sigma,
        Err(_) => sigma.is_empty(),
    }
}

/// How to walk the candidate endomaps of `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Every Choi graph on `Z x Z`; needs `|Z| <= 2`.
    Exhaustive,
    /// Seeded random Choi graphs.
    Sampled { samples: usize, seed: u64 },
}

impl SearchMode {
    /// Exhaustive when the carrier is small enough.
    pub fn auto(c: &ClassicalStructure, samples: usize, seed: u64) -> SearchMode {
        if c.carrier().size() <= MAX_EXHAUSTIVE_SEARCH {
            SearchMode::Exhaustive
        } else {
            SearchMode::Sampled { samples, seed }
        }
    }
}

pub const MAX_EXHAUSTIVE_SEARCH: usize = 2;

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub candidates: usize,
    pub witness: Option<CpmMap>,
}

/// Searches for CPM endomaps `d` of `Z` that fix every classical-point
/// clique, send every state to a union of classical-point cliques, and
/// have `d` and `d^dagger` causal. Returns the first witness in candidate
/// order.
pub fn search_alternative_decoherence(c: &ClassicalStructure, mode: SearchMode) -> Result<SearchReport> {
    let z = c.carrier().clone();
    let g = &c.groupoid;
    let zz = FiniteSet::pair(&z, &z);
    let states = all_states_guarded(&z)?;
    let points: Vec<MixedStateGraph> = (0..g.block_count()).map(|l| point_clique(g, l)).collect();
    let accept = |choi: MixedStateGraph| -> Result<Option<CpmMap>> {
        let d = CpmMap::from_graph(z.clone(), z.clone(), choi)?;
        for p in &points {
            if apply(&d, p)? != *p {
                return Ok(None);
            }
        }
        for rho in &states {
            if !is_union_of_point_cliques(g, &apply(&d, rho)?) {
                return Ok(None);
            }
        }
        if !d.is_causal() || !d.dagger().is_causal() {
            return Ok(None);
        }
        Ok(Some(d))
    };
    match mode {
        SearchMode::Exhaustive => {
            if z.size() > MAX_EXHAUSTIVE_SEARCH {
                return Err(Error::ResourceGuard(format!(
                    "exhaustive search limited to |Z| <= {MAX_EXHAUSTIVE_SEARCH}, got {}",
                    z.size()
                )));
            }
            let candidates = all_states(&zz);
            let total = candidates.len();
            for choi in candidates {
                if let Some(d) = accept(choi)? {
                    return Ok(SearchReport { candidates: total, witness: Some(d) });
                }
            }
            Ok(SearchReport { candidates: total, witness: None })
        }
        SearchMode::Sampled { samples, seed } => {
            let mut rng = gen::rng(seed);
            let mut witness: Option<CpmMap> = None;
            for _ in 0..samples {
                let choi = gen::random_state(&zz, &mut rng);
                if let Some(d) = accept(choi)? {
                    let better = witness.as_ref().is_none_or(|w| d.graph_key() < w.graph_key());
                    if better {
                        witness = Some(d);
                    }
                }
            }
            Ok(SearchReport { candidates: samples, witness })
        }
    }
}

fn all_states_guarded(z: &FiniteSet) -> Result<Vec<MixedStateGraph>> {
    if z.size() > 4 {
        return Err(Error::ResourceGuard(format!(
            "condition (b) needs every state on Z; |Z| = {} is too large",
            z.size()
        )));
    }
    Ok(all_states(z))
}

impl CpmMap {
    /// Total order on maps used to report the least witness.
    pub(crate) fn graph_key(&self) -> (Vec<usize>, Vec<(usize, usize)>) {
        (
            self.graph().nodes().iter().copied().collect(),
            self.graph().edges().iter().copied().collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpm::{apply_relational, compose_cpm, totally_mixed};

    fn z(n: usize) -> ClassicalStructure {
        ClassicalStructure::new(AbelianGroupoid::cyclic(n).unwrap())
    }

    #[test]
    fn relational_form() {
        let c = ClassicalStructure::new(AbelianGroupoid::cyclic_sum(&[2, 1]).unwrap());
        let g = &c.groupoid;
        let d = decoherence_map(&c);
        for gg in 0..9 {
            for hh in 0..9 {
                let (a, a2, b, b2) = (gg / 3, gg % 3, hh / 3, hh % 3);
                let same = [a2, b, b2].iter().all(|&x| g.block_of(x) == g.block_of(a));
                let expect = same && g.sub(a, a2) == g.sub(b, b2);
                assert_eq!(d.rel().contains(gg, hh), expect, "{a}{a2} -> {b}{b2}");
            }
        }
    }

    #[test]
    fn discrete_decoherence_drops_edges() {
        let c = ClassicalStructure::discrete(3);
        let d = decoherence_map(&c);
        for rho in all_states(&FiniteSet::new(3)) {
            assert_eq!(apply(&d, &rho).unwrap(), rho.de_edged());
        }
        assert_eq!(compose_cpm(&d, &d).unwrap(), d);
    }

    #[test]
    fn z3_examples() {
        let c = z(3);
        let x = FiniteSet::new(3);
        let single = MixedStateGraph::pure_state(x.clone(), [0]).unwrap();
        assert_eq!(decohere_fast(&c, &single).unwrap(), totally_mixed(&x));
        let pair = MixedStateGraph::pure_state(x.clone(), [0, 1]).unwrap();
        assert_eq!(decohere_fast(&c, &pair).unwrap(), MixedStateGraph::complete(x.clone()));
        assert_eq!(decohere_fast(&c, &totally_mixed(&x)).unwrap(), totally_mixed(&x));
        assert_eq!(apply(&decoherence_map(&c), &pair).unwrap(), MixedStateGraph::complete(x));
    }

    #[test]
    fn cross_block_edges_vanish() {
        let c = ClassicalStructure::new(AbelianGroupoid::cyclic_sum(&[2, 3]).unwrap());
        let x = FiniteSet::new(5);
        let rho = MixedStateGraph::new(x.clone(), [0, 2], [(0, 2)]).unwrap();
        let out = decohere_fast(&c, &rho).unwrap();
        assert_eq!(out, totally_mixed(&x));
        assert_eq!(out, apply_relational(&decoherence_map(&c), &rho).unwrap());
        assert_eq!(decompose_blockwise(&c, &out).unwrap().len(), 2);
    }

    #[test]
    fn orbit_shapes() {
        let g = AbelianGroupoid::cyclic(4).unwrap();
        assert!(orbit_subgraph(&g, 0, 0).unwrap().graph.is_discrete());
        let o = orbit_subgraph(&g, 0, 3).unwrap();
        assert_eq!(o.shift, 1);
        assert_eq!(o.graph.edges().len(), 4);
        assert_eq!(orbit_subgraph(&g, 0, 2).unwrap().graph.edges().len(), 2);
        assert!(orbit_subgraph(&g, 1, 0).is_err());
    }

    #[test]
    fn searches() {
        let report = search_alternative_decoherence(&z(2), SearchMode::Exhaustive).unwrap();
        assert_eq!(report.candidates, 113);
        assert!(report.witness.is_none());
        let discrete = ClassicalStructure::discrete(2);
        let found = search_alternative_decoherence(&discrete, SearchMode::Exhaustive).unwrap();
        assert_eq!(found.witness, Some(decoherence_map(&discrete)));
        assert!(search_alternative_decoherence(&z(3), SearchMode::Exhaustive).is_err());
    }
}
