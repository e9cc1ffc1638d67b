//! Decoherence in a classical structure via orbit subgraphs, and the
//! search for any other map with its defining properties.

use frel::classical::{AbelianGroupoid, ClassicalStructure};
use frel::cpm::{apply, MixedStateGraph};
use frel::decoherence::{
    decohere_fast, decoherence_map, decompose_blockwise, orbit_components, search_alternative_decoherence, SearchMode,
};
use frel::relcore::FiniteSet;

fn main() -> frel::Result<()> {
    let z4 = ClassicalStructure::new(AbelianGroupoid::cyclic(4)?);
    let rho = MixedStateGraph::new(FiniteSet::new(4), [0, 1, 2], [(0, 1), (1, 2)])?;
    for o in orbit_components(&z4, &rho)? {
        println!("orbit of shift {} in block {}: edges {:?}", o.shift, o.block, o.graph.edges());
    }
    let out = decohere_fast(&z4, &rho)?;
    println!("decohered: {} edges, equals the diagram: {}", out.edges().len(), out == apply(&decoherence_map(&z4), &rho)?);

    let split = ClassicalStructure::new(AbelianGroupoid::cyclic_sum(&[2, 2])?);
    let crossing = MixedStateGraph::pure_state(FiniteSet::new(4), 0..4)?;
    let out = decohere_fast(&split, &crossing)?;
    for (block, part) in decompose_blockwise(&split, &out)? {
        println!("block {block}: nodes {:?}, edges {:?}", part.nodes(), part.edges());
    }

    let z2 = ClassicalStructure::new(AbelianGroupoid::cyclic(2)?);
    let report = search_alternative_decoherence(&z2, SearchMode::Exhaustive)?;
    println!("Z2: {} candidates, alternative found: {}", report.candidates, report.witness.is_some());
    let discrete = ClassicalStructure::discrete(2);
    let report = search_alternative_decoherence(&discrete, SearchMode::Exhaustive)?;
    println!("discrete: witness is dec itself: {}", report.witness == Some(decoherence_map(&discrete)));
    Ok(())
}
