//! Non-demolition and demolition measurements.
//!
//! A measurement of `X` with outcomes in a classical structure on `Z` is
//! given by an isometry `P : X -> X x Z`. The non-demolition measurement is
//! `M = (id_X x dec_Z) . P` doubled, landing in `X x Z`; the demolition
//! measurement discards `X` afterwards. Construction checks idempotence
//! and self-adjointness by composing CPM maps and refuses any `P` that
//! fails them.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{enumerate_structures, AbelianGroupoid, Block, ClassicalStructure};
use crate::cpm::{
    compose_relational, convex_combine, discard_factors, pure_map, tensor_cpm, CpmMap, MixedStateGraph,
};
use crate::decoherence::{decoherence_map, point_clique};
use crate::error::{Error, Result};
use crate::gen;
use crate::relcore::{FiniteSet, Rel};

#[derive(Clone, Debug)]
pub struct Measurement {
    system: FiniteSet,
    outcome: ClassicalStructure,
    isometry: Rel,
    nondemolition: CpmMap,
    demolition: CpmMap,
}

impl PartialEq for Measurement {
    fn eq(&self, other: &Self) -> bool {
        self.system.size() == other.system.size()
            && self.outcome.groupoid == other.outcome.groupoid
            && self.isometry == other.isometry
    }
}

fn then(a: &CpmMap, b: &CpmMap) -> Result<CpmMap> {
    compose_relational(a, b)
}

/// `(id_X x dec_Z) . pure(P)`, without any checks.
pub fn nondemolition_map(p: &Rel, c: &ClassicalStructure) -> Result<CpmMap> {
    let x = p.dom().clone();
    let z = c.carrier().clone();
    if p.cod().size() != x.size() * z.size() {
        return Err(Error::ShapeMismatch(format!(
            "P must map X ({}) into X x Z ({} x {}), got codomain of size {}",
            x.size(),
            x.size(),
            z.size(),
            p.cod().size()
        )));
    }
    let xz = FiniteSet::pair(&x, &z);
    let dephase = tensor_cpm(&CpmMap::identity(&x), &decoherence_map(c));
    then(&pure_map(&p.retyped(x.clone(), xz.clone())?), &dephase.with_types(xz.clone(), xz.clone())?)?
        .with_types(x, xz)
}

/// `(M x id_Z) . M == (id_X x copy_Z) . M`.
pub fn satisfies_idempotence(m: &CpmMap, c: &ClassicalStructure) -> Result<bool> {
    let x = m.dom();
    let z = c.carrier();
    let twice = then(m, &tensor_cpm(m, &CpmMap::identity(z)))?;
    let copied = then(m, &tensor_cpm(&CpmMap::identity(x), &pure_map(&c.comult)))?;
    Ok(twice == copied)
}

/// `(id_X x cap_Z) . (M x id_Z) == pure(P^dagger) . (id_X x dec_Z)`, with
/// `cap_Z` the structure's two-legged effect.
pub fn satisfies_self_adjointness(m: &CpmMap, p: &Rel, c: &ClassicalStructure) -> Result<bool> {
    let x = m.dom();
    let z = c.carrier();
    let lhs = then(
        &tensor_cpm(m, &CpmMap::identity(z)),
        &tensor_cpm(&CpmMap::identity(x), &pure_map(&c.spider(2, 0))),
    )?;
    let rhs = then(&tensor_cpm(&CpmMap::identity(x), &decoherence_map(c)), &pure_map(&p.dagger()))?;
    Ok(lhs == rhs)
}

impl Measurement {
    /// The system type of `P` is `X -> X x Z`; any labels on `p` are
    /// replaced by `X x Z`.
    pub fn new(p: &Rel, c: &ClassicalStructure) -> Result<Measurement> {
        build_measurement(p, c)
    }

    pub fn system(&self) -> &FiniteSet {
        &self.system
    }

    pub fn outcome(&self) -> &ClassicalStructure {
        &self.outcome
    }

    pub fn isometry(&self) -> &Rel {
        &self.isometry
    }

    pub fn nondemolition(&self) -> &CpmMap {
        &self.nondemolition
    }

    pub fn demolition(&self) -> &CpmMap {
        &self.demolition
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome.groupoid.block_count()
    }

    fn check_block(&self, l: usize) -> Result<()> {
        if l >= self.outcome_count() {
            return Err(Error::IndexOutOfRange(format!(
                "outcome {l} of a structure with {} classical points",
                self.outcome_count()
            )));
        }
        Ok(())
    }

    /// `P_l = (id_X x <G_l|) . P` as a relation `X -> X`.
    pub fn branch(&self, l: usize) -> Result<Rel> {
        self.check_block(l)?;
        let z = self.outcome.carrier().size();
        let g = &self.outcome.groupoid;
        let x = &self.system;
        Ok(Rel::from_fn(x.clone(), x.clone(), |a, b| {
            g.blocks()[l].elements.iter().any(|&k| self.isometry.contains(a, b * z + k))
        }))
    }

    /// `x R_l y` iff some `(y, z)` with `z` in block `l` lies in `P(x)`;
    /// this is the relation drawn by [`Measurement::branch`].
    pub fn outcome_relation(&self, l: usize) -> Result<Rel> {
        self.branch(l)
    }

    /// `M_l = (id_X x rho_l^dagger) . M`.
    pub fn project(&self, l: usize) -> Result<CpmMap> {
        self.check_block(l)?;
        let x = &self.system;
        let test = CpmMap::effect(&point_clique(&self.outcome.groupoid, l));
        let evaluate = tensor_cpm(&CpmMap::identity(x), &test);
        then(&self.nondemolition, &evaluate)?.with_types(x.clone(), x.clone())
    }

    /// `rho_l . demolition`, as a graph over `X`.
    pub fn demolition_effect(&self, l: usize) -> Result<MixedStateGraph> {
        self.check_block(l)?;
        let test = CpmMap::effect(&point_clique(&self.outcome.groupoid, l));
        then(&self.demolition, &test)?.as_effect()
    }
}

/// Checks isometry, idempotence and self-adjointness, in that order.
pub fn build_measurement(p: &Rel, c: &ClassicalStructure) -> Result<Measurement> {
    let x = p.dom().clone();
    let z = c.carrier().clone();
    let m = nondemolition_map(p, c)?;
    let p = p.retyped(x.clone(), FiniteSet::pair(&x, &z))?;
    if !p.is_isometry() {
        return Err(Error::NotIsometry);
    }
    if !satisfies_idempotence(&m, c)? {
        return Err(Error::IdempotenceViolation);
    }
    if !satisfies_self_adjointness(&m, &p, c)? {
        return Err(Error::SelfAdjointnessViolation);
    }
    let demolition = then(&m, &discard_factors(&[&x, &z], &[false, true]))?.with_types(x.clone(), z)?;
    Ok(Measurement { system: x, outcome: c.clone(), isometry: p, nondemolition: m, demolition })
}

/// `P(x) = {(x, x)}` with the discrete structure on `X`.
pub fn discrete_measurement(x: &FiniteSet) -> Measurement {
    let n = x.size();
    let p = Rel::from_fn(x.clone(), FiniteSet::pair(x, x), |a, b| b == a * n + a);
    build_measurement(&p, &ClassicalStructure::discrete(n)).expect("the copy map measures")
}

/// The one-outcome measurement: `P(x) = {(x, 0)}` into `X x 1`.
pub fn trivial_measurement(x: &FiniteSet) -> Measurement {
    let p = Rel::identity(x).retyped(x.clone(), FiniteSet::pair(x, &FiniteSet::unit())).expect("|X x 1| = |X|");
    build_measurement(&p, &ClassicalStructure::discrete(1)).expect("the identity measures")
}

/// A classical structure on `X`, and the map from its
/// blocks to outcomes.
#[derive(Clone, Debug)]
pub struct DemolitionDecomposition {
    pub x_structure: ClassicalStructure,
    /// `f[g]` is the outcome block reproduced by block `g` of `x_structure`.
    pub f: Vec<usize>,
}

/// Equivalence classes of each `R_l`, in order of `l` then least element.
pub fn outcome_classes(m: &Measurement) -> Result<Vec<(usize, Vec<usize>)>> {
    let mut out = Vec::new();
    for l in 0..m.outcome_count() {
        let r = m.outcome_relation(l)?;
        let mut seen = BTreeSet::new();
        for x in 0..m.system.size() {
            if seen.contains(&x) || !r.contains(x, x) {
                continue;
            }
            let class: Vec<usize> = r.image_of(x).collect();
            seen.extend(class.iter().copied());
            out.push((l, class));
        }
    }
    Ok(out)
}

/// Rebuilds every demolition effect from decoherence in a structure on `X`
/// whose blocks are the classes of the `R_l` (cyclic groups, least element
/// as unit), followed by `f : (l, j) -> l`. Fails if any effect is not
/// reproduced.
pub fn decompose_demolition(m: &Measurement) -> Result<DemolitionDecomposition> {
    let x = m.system.clone();
    let classes = outcome_classes(m)?;
    let blocks = classes.iter().map(|(_, c)| Block::cyclic(c)).collect::<Result<Vec<_>>>()?;
    let groupoid = AbelianGroupoid::new(x.clone(), blocks)
        .map_err(|e| Error::VerificationFailure(format!("outcome classes do not partition X: {e}")))?;
    let f: Vec<usize> = groupoid
        .blocks()
        .iter()
        .map(|b| classes.iter().find(|(_, c)| *c == b.elements).map(|(l, _)| *l).expect("block from a class"))
        .collect();
    let x_structure = ClassicalStructure::new(groupoid);
    let dec = decoherence_map(&x_structure);
    let effects: Vec<MixedStateGraph> = (0..x_structure.groupoid.block_count())
        .map(|g| then(&dec, &CpmMap::effect(&point_clique(&x_structure.groupoid, g)))?.as_effect())
        .collect::<Result<_>>()?;
    for l in 0..m.outcome_count() {
        let parts: Vec<MixedStateGraph> =
            f.iter().enumerate().filter(|(_, &t)| t == l).map(|(g, _)| effects[g].clone()).collect();
        let rebuilt = if parts.is_empty() { MixedStateGraph::empty(x.clone()) } else { convex_combine(&parts)? };
        if rebuilt != m.demolition_effect(l)? {
            return Err(Error::VerificationFailure(format!("outcome {l} is not reproduced by decoherence")));
        }
    }
    Ok(DemolitionDecomposition { x_structure, f })
}

/// Attempts per call of [`random_measurement`].
pub const GENERATION_BUDGET: usize = 2000;

/// A seeded random measurement on `X`. Each attempt partitions `X`, picks
/// an outcome structure with at most three elements, sends each class `C`
/// to a block `G`, and hands out cells of `C x G` to members of `C` so that
/// every member gets at least one and no cell has two owners: either by
/// group differences through a labelling of `C` by `G`, or in stripes, or
/// at random. Attempts that fail the measurement laws are discarded.
pub fn random_measurement(x: &FiniteSet, seed: u64) -> Result<Measurement> {
    let n = x.size();
    if n <= 1 {
        return Ok(trivial_measurement(x));
    }
    let mut rng = gen::rng(seed);
    for _ in 0..GENERATION_BUDGET {
        let zsize = rng.gen_range(1..=3);
        let structures = enumerate_structures(zsize)?;
        let g = structures.choose(&mut rng).expect("structures exist").clone();
        let c = ClassicalStructure::new(g.clone());
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for l in labels.iter().copied().collect::<BTreeSet<_>>() {
            classes.push((0..n).filter(|&a| labels[a] == l).collect());
        }
        let mut p = Rel::empty(x.clone(), FiniteSet::pair(x, c.carrier()));
        let mode = rng.gen_range(0..3);
        for class in &classes {
            let bi = rng.gen_range(0..g.block_count());
            let block = &g.blocks()[bi].elements;
            let mut cells: Vec<(usize, usize)> =
                class.iter().flat_map(|&y| block.iter().map(move |&k| (y, k))).collect();
            if mode == 0 && block.len() == class.len() {
                // Label the class by the block; member a sees y at outcome label(y) - label(a).
                let mut labels = block.clone();
                labels.shuffle(&mut rng);
                for (i, &owner) in class.iter().enumerate() {
                    for (j, &y) in class.iter().enumerate() {
                        let k = g.sub(labels[j], labels[i]).expect("same block");
                        p.set(owner, y * zsize + k);
                    }
                }
                continue;
            }
            if mode == 1 && block.len() >= class.len() {
                // Disjoint outcome sets per member, each paired with the whole class.
                let mut outcomes = block.clone();
                outcomes.shuffle(&mut rng);
                for (i, &owner) in class.iter().enumerate() {
                    let mine: Vec<usize> = outcomes.iter().skip(i).step_by(class.len()).copied().collect();
                    for &y in class {
                        for &k in &mine {
                            p.set(owner, y * zsize + k);
                        }
                    }
                }
                continue;
            }
            cells.shuffle(&mut rng);
            for (i, &(y, k)) in cells.iter().enumerate() {
                let owner = if i < class.len() {
                    Some(class[i])
                } else if rng.gen_bool(0.7) {
                    Some(class[rng.gen_range(0..class.len())])
                } else {
                    None
                };
                if let Some(o) = owner {
                    p.set(o, y * zsize + k);
                }
            }
        }
        if let Ok(m) = build_measurement(&p, &c) {
            return Ok(m);
        }
    }
    Err(Error::GenerationExhausted(GENERATION_BUDGET))
}

#[derive(Serialize, Deserialize)]
struct MeasurementWire {
    system: FiniteSet,
    outcome_structure: AbelianGroupoid,
    isometry: Rel,
}

impl Serialize for Measurement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MeasurementWire {
            system: self.system.clone(),
            outcome_structure: self.outcome.groupoid.clone(),
            isometry: self.isometry.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Measurement {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let w = MeasurementWire::deserialize(deserializer)?;
        let p = w.isometry.retyped(w.system.clone(), w.isometry.cod().clone()).map_err(serde::de::Error::custom)?;
        build_measurement(&p, &ClassicalStructure::new(w.outcome_structure)).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize) -> FiniteSet {
        FiniteSet::new(n)
    }

    #[test]
    fn discrete_measurement_laws() {
        let m = discrete_measurement(&set(2));
        assert!(m.nondemolition().is_causal());
        assert_eq!(m.project(0).unwrap(), pure_map(&Rel::from_pairs(set(2), set(2), [(0, 0)]).unwrap()));
        let e = m.demolition_effect(1).unwrap();
        assert_eq!(e, MixedStateGraph::pure_state(set(2), [1]).unwrap());
        let d = decompose_demolition(&m).unwrap();
        assert!(d.x_structure.groupoid.is_discrete());
        assert_eq!(d.f, vec![0, 1]);
    }

    #[test]
    fn trivial_measurement_is_identity() {
        let m = trivial_measurement(&set(3));
        assert_eq!(m.project(0).unwrap(), CpmMap::identity(&set(3)));
        // Discarding X has a discrete graph, and every R_0 class is a singleton.
        assert_eq!(m.demolition_effect(0).unwrap(), MixedStateGraph::totally_mixed(set(3)));
        assert_eq!(m.outcome_relation(0).unwrap(), Rel::identity(&set(3)));
        let d = decompose_demolition(&m).unwrap();
        assert!(d.x_structure.groupoid.is_discrete());
        assert_eq!(d.f, vec![0, 0, 0]);
    }

    #[test]
    fn non_isometries_are_rejected() {
        let p = Rel::empty(set(2), set(4));
        assert_eq!(build_measurement(&p, &ClassicalStructure::discrete(2)), Err(Error::NotIsometry));
        assert!(matches!(
            build_measurement(&Rel::empty(set(2), set(3)), &ClassicalStructure::discrete(2)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn spread_outcomes_fail_idempotence() {
        // One system element sent to both outcomes of a discrete structure.
        let p = Rel::from_pairs(set(1), set(2), [(0, 0), (0, 1)]).unwrap();
        assert_eq!(build_measurement(&p, &ClassicalStructure::discrete(2)), Err(Error::IdempotenceViolation));
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let a = random_measurement(&set(3), 11).unwrap();
        let b = random_measurement(&set(3), 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(random_measurement(&set(1), 5).unwrap(), trivial_measurement(&set(1)));
        for seed in 0..10 {
            let m = random_measurement(&set(3), seed).unwrap();
            decompose_demolition(&m).unwrap();
        }
    }

    #[test]
    fn json_round_trip() {
        let m = discrete_measurement(&set(2));
        let s = serde_json::to_string(&m).unwrap();
        let back: Measurement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}

