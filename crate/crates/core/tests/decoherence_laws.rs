use frel::classical::{enumerate_structures, AbelianGroupoid, ClassicalStructure};
use frel::cpm::{all_states, apply, compose_cpm, MixedStateGraph};
use frel::decoherence::{decohere_fast, decoherence_map, is_union_of_point_cliques, orbit_components};
use frel::gen::{random_state, rng};
use frel::relcore::FiniteSet;
use proptest::prelude::*;
use std::collections::BTreeSet;

#[test]
fn decoherence_is_an_idempotent_channel() {
    for n in 0..=4 {
        for g in enumerate_structures(n).unwrap() {
            let dec = decoherence_map(&ClassicalStructure::new(g.clone()));
            assert!(dec.is_causal() && dec.is_causal_by_graph(), "{g}");
            assert_eq!(compose_cpm(&dec, &dec).unwrap(), dec, "{g}");
        }
    }
}

#[test]
fn discrete_decoherence_drops_edges() {
    for n in 1..=4 {
        let c = ClassicalStructure::discrete(n);
        for rho in all_states(&FiniteSet::new(n)) {
            assert_eq!(decohere_fast(&c, &rho).unwrap(), rho.de_edged());
        }
    }
}

#[test]
fn decoherence_need_not_give_classical_points() {
    let z3 = ClassicalStructure::new(AbelianGroupoid::cyclic(3).unwrap());
    let single = MixedStateGraph::pure_state(FiniteSet::new(3), [0]).unwrap();
    let out = decohere_fast(&z3, &single).unwrap();
    assert_eq!(out.nodes().len(), 3);
    assert!(out.edges().is_empty() && !is_union_of_point_cliques(&z3.groupoid, &out));
    let full = MixedStateGraph::pure_state(FiniteSet::new(3), 0..3).unwrap();
    assert!(is_union_of_point_cliques(&z3.groupoid, &decohere_fast(&z3, &full).unwrap()));
}

fn structure() -> impl Strategy<Value = ClassicalStructure> {
    (1usize..=5).prop_flat_map(|n| {
        let all = enumerate_structures(n).unwrap();
        (0..all.len()).prop_map(move |i| ClassicalStructure::new(all[i].clone()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn orbit_rule_matches_the_diagram(c in structure(), seed: u64) {
        let rho = random_state(c.carrier(), &mut rng(seed));
        let fast = decohere_fast(&c, &rho).unwrap();
        prop_assert_eq!(&fast, &apply(&decoherence_map(&c), &rho).unwrap());
        let g = &c.groupoid;
        for o in orbit_components(&c, &rho).unwrap() {
            prop_assert!(o.graph.nodes().iter().all(|&x| g.block_of(x) == o.block));
        }
    }

    /// A touched block comes out as a clique exactly when the differences
    /// of its links already exhaust the block.
    #[test]
    fn clique_outputs_follow_the_difference_set(c in structure(), seed: u64) {
        let rho = random_state(c.carrier(), &mut rng(seed));
        let out = decohere_fast(&c, &rho).unwrap();
        let g = &c.groupoid;
        let mut expected = true;
        for (l, block) in g.blocks().iter().enumerate() {
            let diffs: BTreeSet<usize> = rho
                .links()
                .filter(|&(a, b)| g.block_of(a) == l && g.block_of(b) == l)
                .map(|(a, b)| g.sub(a, b).unwrap())
                .collect();
            expected &= diffs.is_empty() || diffs.len() == block.len();
        }
        prop_assert_eq!(is_union_of_point_cliques(g, &out), expected);
    }
}
