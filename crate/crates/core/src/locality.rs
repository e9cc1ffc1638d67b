//! Possibilistic empirical models and their local hidden variables.
//!
//! A scenario fixes parties `X_1..X_N` and contexts `1..M`, each context
//! choosing one classical structure per party. Testing a mixed state on
//! `X_1 x ... x X_N` against products of classical points gives one boolean
//! table per context. Measurements are identified by `(party, structure)`;
//! the distinct ones are the measurement classes, and one hidden-variable
//! coordinate is kept per class.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{enumerate_structures, AbelianGroupoid, ClassicalStructure};
use crate::cpm::{
    apply, compose_relational, discard_factors, evaluate, pure_map, tensor_all, CpmMap, MixedStateGraph,
};
use crate::decoherence::decoherence_map;
use crate::error::{Error, Result};
use crate::relcore::{permutation, FiniteSet, ProductIndex};

/// Parties and, per context, one classical structure for each party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementScenario {
    parties: Vec<FiniteSet>,
    contexts: Vec<Vec<AbelianGroupoid>>,
    /// Per party, the distinct structures in order of first use.
    classes: Vec<Vec<AbelianGroupoid>>,
}

impl MeasurementScenario {
    pub fn new(parties: Vec<FiniteSet>, contexts: Vec<Vec<AbelianGroupoid>>) -> Result<MeasurementScenario> {
        let n = parties.len();
        let mut classes: Vec<Vec<AbelianGroupoid>> = vec![Vec::new(); n];
        for (m, ctx) in contexts.iter().enumerate() {
            if ctx.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "context {m} has {} structures for {n} parties",
                    ctx.len()
                )));
            }
            for (j, g) in ctx.iter().enumerate() {
                if g.size() != parties[j].size() {
                    return Err(Error::CarrierMismatch(format!(
                        "context {m}, party {j}: structure on {} elements, party has {}",
                        g.size(),
                        parties[j].size()
                    )));
                }
                if !classes[j].contains(g) {
                    classes[j].push(g.clone());
                }
            }
        }
        Ok(MeasurementScenario { parties, contexts, classes })
    }

    pub fn parties(&self) -> &[FiniteSet] {
        &self.parties
    }

    pub fn contexts(&self) -> &[Vec<AbelianGroupoid>] {
        &self.contexts
    }

    /// The product of all parties.
    pub fn joint_system(&self) -> FiniteSet {
        FiniteSet::product(&self.parties.iter().collect::<Vec<_>>())
    }

    /// Distinct structures used by party `j`.
    pub fn classes_of(&self, j: usize) -> &[AbelianGroupoid] {
        &self.classes[j]
    }

    /// Class of the structure party `j` uses in context `m`.
    pub fn class_index(&self, j: usize, m: usize) -> usize {
        let g = &self.contexts[m][j];
        self.classes[j].iter().position(|c| c == g).expect("classes cover contexts")
    }

    /// Hidden-variable coordinates `(party, class)`, party-major.
    pub fn wires(&self) -> Vec<(usize, usize)> {
        (0..self.parties.len()).flat_map(|j| (0..self.classes[j].len()).map(move |k| (j, k))).collect()
    }

    /// Total number of measurement classes.
    pub fn class_count(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    /// Context `m` as a set of `(party, class)` measurements.
    pub fn context_cover(&self, m: usize) -> BTreeSet<(usize, usize)> {
        (0..self.parties.len()).map(|j| (j, self.class_index(j, m))).collect()
    }

    /// The cover with repeated contexts collapsed, as the set it is.
    pub fn cover(&self) -> Vec<BTreeSet<(usize, usize)>> {
        let set: BTreeSet<BTreeSet<(usize, usize)>> = (0..self.contexts.len()).map(|m| self.context_cover(m)).collect();
        set.into_iter().collect()
    }

    /// No context of the cover strictly contains another.
    pub fn cover_is_antichain(&self) -> bool {
        let cover = self.cover();
        cover.iter().all(|a| cover.iter().all(|b| a == b || !a.is_subset(b)))
    }

    /// Number of classical points for each party in context `m`.
    pub fn outcome_radices(&self, m: usize) -> Vec<usize> {
        self.contexts[m].iter().map(AbelianGroupoid::block_count).collect()
    }

    /// Parties whose structure is the same in contexts `m` and `m2`.
    pub fn shared_parties(&self, m: usize, m2: usize) -> Vec<usize> {
        (0..self.parties.len()).filter(|&j| self.contexts[m][j] == self.contexts[m2][j]).collect()
    }
}

/// A boolean distribution on a product of finite outcome sets, given by
/// its support.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DistributionWire", into = "DistributionWire")]
pub struct BoolDistribution {
    radices: Vec<usize>,
    support: BTreeSet<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct DistributionWire {
    radices: Vec<usize>,
    support: Vec<Vec<usize>>,
}

impl TryFrom<DistributionWire> for BoolDistribution {
    type Error = Error;
    fn try_from(w: DistributionWire) -> Result<Self> {
        BoolDistribution::new(w.radices, w.support)
    }
}

impl From<BoolDistribution> for DistributionWire {
    fn from(d: BoolDistribution) -> Self {
        DistributionWire { radices: d.radices, support: d.support.into_iter().collect() }
    }
}

impl BoolDistribution {
    pub fn new<I: IntoIterator<Item = Vec<usize>>>(radices: Vec<usize>, support: I) -> Result<BoolDistribution> {
        let support: BTreeSet<Vec<usize>> = support.into_iter().collect();
        for t in &support {
            if t.len() != radices.len() || t.iter().zip(&radices).any(|(&v, &r)| v >= r) {
                return Err(Error::IndexOutOfRange(format!("outcome {t:?} outside {radices:?}")));
            }
        }
        Ok(BoolDistribution { radices, support })
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn support(&self) -> &BTreeSet<Vec<usize>> {
        &self.support
    }

    pub fn value(&self, outcome: &[usize]) -> bool {
        self.support.contains(outcome)
    }

    /// Normalised in the boolean semiring: some outcome is possible.
    pub fn is_normalized(&self) -> bool {
        !self.support.is_empty()
    }

    /// Marginal on the listed coordinates, in the listed order.
    pub fn restrict(&self, coords: &[usize]) -> Result<BoolDistribution> {
        let distinct: BTreeSet<&usize> = coords.iter().collect();
        if distinct.len() != coords.len() || coords.iter().any(|&c| c >= self.radices.len()) {
            return Err(Error::OutOfRange(format!(
                "coordinates {coords:?} for a distribution on {} coordinates",
                self.radices.len()
            )));
        }
        Ok(BoolDistribution {
            radices: coords.iter().map(|&c| self.radices[c]).collect(),
            support: self.support.iter().map(|t| coords.iter().map(|&c| t[c]).collect()).collect(),
        })
    }
}

/// The tables of a scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalModel {
    scenario: MeasurementScenario,
    tables: Vec<BoolDistribution>,
}

impl EmpiricalModel {
    /// Tables must sit on each context's outcome sets.
    pub fn new(scenario: MeasurementScenario, tables: Vec<BoolDistribution>) -> Result<EmpiricalModel> {
        if tables.len() != scenario.contexts.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} tables for {} contexts",
                tables.len(),
                scenario.contexts.len()
            )));
        }
        for (m, t) in tables.iter().enumerate() {
            if t.radices() != scenario.outcome_radices(m) {
                return Err(Error::ShapeMismatch(format!(
                    "table {m} on {:?}, context has outcomes {:?}",
                    t.radices(),
                    scenario.outcome_radices(m)
                )));
            }
        }
        Ok(EmpiricalModel { scenario, tables })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn tables(&self) -> &[BoolDistribution] {
        &self.tables
    }
}

fn check_state(rho: &MixedStateGraph, s: &MeasurementScenario) -> Result<()> {
    let joint = s.joint_system();
    if rho.carrier().size() != joint.size() {
        return Err(Error::CarrierMismatch(format!(
            "state on {} elements, parties multiply to {}",
            rho.carrier().size(),
            joint.size()
        )));
    }
    if !rho.is_causal() {
        return Err(Error::NotCausal);
    }
    Ok(())
}

/// The pure state on the product of one subset per party.
pub fn product_pure_state(parties: &[FiniteSet], subsets: &[&[usize]]) -> MixedStateGraph {
    let index = ProductIndex::new(parties.iter().map(FiniteSet::size).collect());
    let joint = FiniteSet::product(&parties.iter().collect::<Vec<_>>());
    let nodes: Vec<usize> = subsets
        .iter()
        .map(|s| s.iter().copied())
        .fold(vec![Vec::new()], |acc: Vec<Vec<usize>>, s| {
            let s: Vec<usize> = s.collect();
            acc.into_iter().flat_map(|p| s.iter().map(move |&v| [p.clone(), vec![v]].concat())).collect()
        })
        .iter()
        .map(|t| index.encode(t))
        .collect();
    MixedStateGraph::pure_state(joint, nodes).expect("product indices in range")
}

/// `Phi^m(l_1..l_N)` = `rho` evaluated against the product of the
/// classical points `G_{l_j}`.
pub fn empirical_model(rho: &MixedStateGraph, s: &MeasurementScenario) -> Result<EmpiricalModel> {
    check_state(rho, s)?;
    let mut tables = Vec::with_capacity(s.contexts.len());
    for (m, ctx) in s.contexts.iter().enumerate() {
        let radices = s.outcome_radices(m);
        let index = ProductIndex::new(radices.clone());
        let mut support = Vec::new();
        for outcome in index.tuples() {
            let subsets: Vec<&[usize]> =
                outcome.iter().zip(ctx).map(|(&l, g)| g.blocks()[l].elements.as_slice()).collect();
            if evaluate(&product_pure_state(&s.parties, &subsets), rho)? {
                support.push(outcome);
            }
        }
        tables.push(BoolDistribution::new(radices, support)?);
    }
    EmpiricalModel::new(s.clone(), tables)
}

/// Two contexts whose restrictions to their shared parties disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignallingWitness {
    pub context: usize,
    pub other: usize,
    pub parties: Vec<usize>,
}

/// Compares every pair of contexts on the parties they measure alike.
/// Agreement on the full shared set implies agreement on its subsets; the
/// empty subset is compared too, which checks matching normalisation.
pub fn check_no_signalling(e: &EmpiricalModel) -> Result<Option<SignallingWitness>> {
    let s = &e.scenario;
    for m in 0..s.contexts.len() {
        for m2 in m + 1..s.contexts.len() {
            let shared = s.shared_parties(m, m2);
            for coords in [Vec::new(), shared] {
                if e.tables[m].restrict(&coords)? != e.tables[m2].restrict(&coords)? {
                    return Ok(Some(SignallingWitness { context: m, other: m2, parties: coords }));
                }
            }
        }
    }
    Ok(None)
}

/// One outcome per `(party, class)` wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HiddenVariable {
    pub wires: Vec<(usize, usize)>,
    pub distribution: BoolDistribution,
}

impl HiddenVariable {
    /// Marginal on context `m`, ordered by party.
    pub fn restrict_to_context(&self, s: &MeasurementScenario, m: usize) -> Result<BoolDistribution> {
        let coords: Vec<usize> = (0..s.parties.len())
            .map(|j| self.wires.iter().position(|&w| w == (j, s.class_index(j, m))).expect("wire"))
            .collect();
        self.distribution.restrict(&coords)
    }
}

/// Decoheres `rho` in the discrete structure of every party.
pub fn discrete_decoherence(rho: &MixedStateGraph, parties: &[FiniteSet]) -> Result<MixedStateGraph> {
    let maps: Vec<CpmMap> = parties.iter().map(|x| decoherence_map(&ClassicalStructure::discrete(x.size()))).collect();
    apply(&tensor_all(&maps), rho)?.with_carrier(rho.carrier().clone())
}

/// The hidden variable read off the nodes of the discretely decohered
/// state, each node giving, for every wire, the block of its party's
/// component. Every context marginal is checked against the model.
pub fn construct_lhv(rho: &MixedStateGraph, s: &MeasurementScenario) -> Result<HiddenVariable> {
    let model = empirical_model(rho, s)?;
    let d = discrete_decoherence(rho, &s.parties)?;
    let index = ProductIndex::new(s.parties.iter().map(FiniteSet::size).collect());
    let wires = s.wires();
    let radices: Vec<usize> = wires.iter().map(|&(j, k)| s.classes[j][k].block_count()).collect();
    let support: Vec<Vec<usize>> = d
        .nodes()
        .iter()
        .map(|&node| {
            let g = index.decode(node);
            wires.iter().map(|&(j, k)| s.classes[j][k].block_of(g[j])).collect()
        })
        .collect();
    let lhv = HiddenVariable { wires, distribution: BoolDistribution::new(radices, support)? };
    for m in 0..s.contexts.len() {
        if lhv.restrict_to_context(s, m)? != model.tables[m] {
            return Err(Error::VerificationFailure(format!("hidden variable disagrees with context {m}")));
        }
    }
    Ok(lhv)
}

/// Largest tensor of wires [`build_local_map`] accepts by default.
pub const DEFAULT_LOCAL_MAP_BUDGET: usize = 64;

/// The local map with its wire bookkeeping.
#[derive(Clone, Debug)]
pub struct LocalMap {
    pub map: CpmMap,
    /// Input wires `(party, class)`.
    pub inputs: Vec<(usize, usize)>,
    /// Output wires `(context, party)`.
    pub outputs: Vec<(usize, usize)>,
}

/// Wires each class input through its structure's copy spider, one leg per
/// context using that class, then orders the outputs by context and party.
pub fn build_local_map(s: &MeasurementScenario, budget: usize) -> Result<LocalMap> {
    let inputs = s.wires();
    let in_sizes: usize = inputs.iter().map(|&(j, _)| s.parties[j].size()).product();
    let mut grouped: Vec<(usize, usize)> = Vec::new();
    let mut spiders = Vec::with_capacity(inputs.len());
    for &(j, k) in &inputs {
        let users: Vec<usize> = (0..s.contexts.len()).filter(|&m| s.class_index(j, m) == k).collect();
        let c = ClassicalStructure::new(s.classes[j][k].clone());
        spiders.push(pure_map(&c.spider(1, users.len())));
        grouped.extend(users.iter().map(|&m| (m, j)));
    }
    let out_sizes: usize = grouped.iter().map(|&(_, j)| s.parties[j].size()).product();
    if in_sizes.max(out_sizes) > budget {
        return Err(Error::BudgetExceeded(format!(
            "local map on {in_sizes} -> {out_sizes} elements exceeds {budget}"
        )));
    }
    let outputs: Vec<(usize, usize)> =
        (0..s.contexts.len()).flat_map(|m| (0..s.parties.len()).map(move |j| (m, j))).collect();
    let order: Vec<usize> =
        outputs.iter().map(|w| grouped.iter().position(|g| g == w).expect("every output wired")).collect();
    let factor_sets: Vec<&FiniteSet> = grouped.iter().map(|&(_, j)| &s.parties[j]).collect();
    let reorder = pure_map(&permutation(&factor_sets, &order));
    let copies = tensor_all(&spiders);
    let map = compose_relational(&copies.with_types(copies.dom().clone(), reorder.dom().clone())?, &reorder)?;
    Ok(LocalMap { map, inputs, outputs })
}

/// The hidden state on the class wires: each party's component of the
/// decohered state copied once per class of that party.
pub fn hidden_state(rho: &MixedStateGraph, s: &MeasurementScenario) -> Result<MixedStateGraph> {
    let d = discrete_decoherence(rho, &s.parties)?;
    let copies: Vec<CpmMap> = s
        .parties
        .iter()
        .enumerate()
        .map(|(j, x)| pure_map(&ClassicalStructure::discrete(x.size()).spider(1, s.classes[j].len())))
        .collect();
    apply(&tensor_all(&copies), &d)
}

/// For each context `r`: feeds the hidden state through the local map,
/// discards the other contexts, and compares the outcome table with the
/// model's. Returns the first context that disagrees.
pub fn check_local_map_law(rho: &MixedStateGraph, s: &MeasurementScenario, lm: &LocalMap) -> Result<Option<usize>> {
    let model = empirical_model(rho, s)?;
    let nu = hidden_state(rho, s)?;
    let out = apply(&lm.map, &nu.with_carrier(lm.map.dom().clone())?)?;
    let out_sets: Vec<&FiniteSet> = lm.outputs.iter().map(|&(_, j)| &s.parties[j]).collect();
    for r in 0..s.contexts.len() {
        let keep: Vec<bool> = lm.outputs.iter().map(|&(m, _)| m == r).collect();
        let traced = apply(&discard_factors(&out_sets, &keep), &out)?;
        let local = MeasurementScenario::new(s.parties.clone(), vec![s.contexts[r].clone()])?;
        if !traced.is_causal() {
            return Ok(Some(r));
        }
        let table = empirical_model(&traced, &local)?;
        if table.tables[0] != model.tables[r] {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// A scenario with structures drawn uniformly from all structures on each
/// party.
pub fn random_scenario<R: Rng>(parties: &[FiniteSet], contexts: usize, rng: &mut R) -> Result<MeasurementScenario> {
    let options: Vec<Vec<AbelianGroupoid>> =
        parties.iter().map(|x| enumerate_structures(x.size())).collect::<Result<_>>()?;
    let ctxs = (0..contexts)
        .map(|_| options.iter().map(|o| o.choose(rng).expect("structures exist").clone()).collect())
        .collect();
    MeasurementScenario::new(parties.to_vec(), ctxs)
}

/// A reference to a structure in scenario JSON: inline, a key of the
/// `structures` map, or one of the built-ins `"discrete"` and `"cyclic"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructureRef {
    Named(String),
    Inline(AbelianGroupoid),
}

#[derive(Serialize, Deserialize)]
pub struct ScenarioWire {
    pub parties: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub structures: BTreeMap<String, AbelianGroupoid>,
    pub contexts: Vec<Vec<StructureRef>>,
}

impl ScenarioWire {
    pub fn resolve(self) -> Result<MeasurementScenario> {
        let parties: Vec<FiniteSet> = self.parties.iter().map(|&n| FiniteSet::new(n)).collect();
        let mut contexts = Vec::new();
        for (m, ctx) in self.contexts.into_iter().enumerate() {
            let mut row = Vec::new();
            for (j, r) in ctx.into_iter().enumerate() {
                let size = *self.parties.get(j).ok_or_else(|| {
                    Error::ShapeMismatch(format!("context {m} names more structures than parties"))
                })?;
                row.push(match r {
                    StructureRef::Inline(g) => g,
                    StructureRef::Named(name) => match (name.as_str(), self.structures.get(&name)) {
                        (_, Some(g)) => g.clone(),
                        ("discrete", None) => AbelianGroupoid::discrete(size),
                        ("cyclic", None) => AbelianGroupoid::cyclic(size)?,
                        _ => return Err(Error::Json(format!("unknown structure {name:?}"))),
                    },
                });
            }
            contexts.push(row);
        }
        MeasurementScenario::new(parties, contexts)
    }
}

impl Serialize for MeasurementScenario {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ScenarioWire {
            parties: self.parties.iter().map(FiniteSet::size).collect(),
            structures: BTreeMap::new(),
            contexts: self
                .contexts
                .iter()
                .map(|ctx| ctx.iter().cloned().map(StructureRef::Inline).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeasurementScenario {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        ScenarioWire::deserialize(deserializer)?.resolve().map_err(serde::de::Error::custom)
    }
}

impl Serialize for EmpiricalModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            scenario: &'a MeasurementScenario,
            tables: &'a [BoolDistribution],
        }
        Wire { scenario: &self.scenario, tables: &self.tables }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EmpiricalModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            scenario: MeasurementScenario,
            tables: Vec<BoolDistribution>,
        }
        let w = Wire::deserialize(deserializer)?;
        EmpiricalModel::new(w.scenario, w.tables).map_err(serde::de::Error::custom)
    }
}

/// Two parties on 2-sets, contexts `(discrete, discrete)` and `(Z2, Z2)`,
/// with the state `{(0,0), (1,1)}` pure.
pub fn bell_example() -> (MixedStateGraph, MeasurementScenario) {
    let two = FiniteSet::new(2);
    let d = AbelianGroupoid::discrete(2);
    let z2 = AbelianGroupoid::cyclic(2).expect("Z2");
    let s = MeasurementScenario::new(vec![two.clone(), two], vec![vec![d.clone(), d], vec![z2.clone(), z2]])
        .expect("well-formed scenario");
    let rho = MixedStateGraph::pure_state(FiniteSet::new(4), [0, 3]).expect("in range");
    (rho, s)
}
