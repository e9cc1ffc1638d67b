//! Mixed states as graphs: purity order, evaluation, purification and the
//! graph rules for applying and composing CPM maps.

use frel::cpm::{
    all_states, apply, apply_relational, compose_cpm, compose_relational, convex_combine, decompose_pure, evaluate,
    pure_map, purify_state, CpmMap, MixedStateGraph,
};
use frel::gen::{random_cpm_map, rng};
use frel::relcore::{FiniteSet, Rel};

fn main() -> frel::Result<()> {
    let three = FiniteSet::new(3);
    println!("states on a 3-set: {}", all_states(&three).len());

    let pure = MixedStateGraph::pure_state(three.clone(), 0..3)?;
    let split = decompose_pure(&pure, 3)?;
    println!("a triangle as a mixture of {} non-pure states, rebuilt: {}", split.len(), convex_combine(&split)? == pure);

    let mixed = pure.de_edged();
    let probe = MixedStateGraph::pure_state(three.clone(), [1])?;
    println!("purity is invisible to tests: {}", evaluate(&probe, &pure)? == evaluate(&probe, &mixed)?);

    let (env, f) = purify_state(&mixed);
    println!("purifying {} edge-free nodes needs an environment of {}; f has {} pairs", mixed.nodes().len(), env.size(), f.len());

    let shift = Rel::from_pairs(three.clone(), three.clone(), [(0, 1), (1, 2), (2, 0)])?;
    let out = apply(&pure_map(&shift), &MixedStateGraph::new(three.clone(), [0, 1], [(0, 1)])?)?;
    println!("shifted edge: nodes {:?}, edges {:?}", out.nodes(), out.edges());

    let mut g = rng(5);
    let r = random_cpm_map(&three, &FiniteSet::new(2), &mut g);
    let s = random_cpm_map(&FiniteSet::new(2), &three, &mut g);
    println!("graph rule agrees with relations: {}", compose_cpm(&r, &s)? == compose_relational(&r, &s)?);
    println!("apply agrees: {}", apply(&r, &pure)? == apply_relational(&r, &pure)?);
    println!("identity map is causal: {}", CpmMap::identity(&three).is_causal());
    println!("{}", pure.to_dot("triangle"));
    Ok(())
}
