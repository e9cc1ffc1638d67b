//! Mixed states and CPM maps over finite relations, in graph form.
//!
//! A mixed state on `X` is a symmetric relation `rho` on `X` that is
//! reflexive on every element it mentions. It is drawn as a graph: a node
//! `x` for each `(x, x)` in `rho`, an edge `{x, y}` for each `(x, y)` with
//! `x != y`.
//!
//! A CPM map `X -> Y` is a relation `R : X x X -> Y x Y`. Bending its wires
//! gives a mixed state on `X x Y` (the Choi graph):
//!
//! ```text
//! node [x, y]            iff  ((x, x), (y, y))   in R
//! edge [x, y] -- [x', y'] iff  ((x, x'), (y, y')) in R
//! ```
//!
//! [`CpmMap`] keeps both views and checks they agree. Application and
//! composition are available twice over: by the graph rules on Choi
//! graphs ([`apply`], [`compose_cpm`]) and by plain relational composition
//! ([`apply_relational`], [`compose_relational`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relcore::{cap, permutation, FiniteSet, Rel};

/// A mixed state: nodes plus undirected edges between nodes.
#[derive(Clone, Debug, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphWire", into = "GraphWire")]
pub struct MixedStateGraph {
    carrier: FiniteSet,
    nodes: BTreeSet<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl PartialEq for MixedStateGraph {
    fn eq(&self, other: &Self) -> bool {
        self.carrier.size() == other.carrier.size()
            && self.nodes == other.nodes
            && self.edges == other.edges
    }
}

impl std::hash::Hash for MixedStateGraph {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.carrier.size(), &self.nodes, &self.edges).hash(state);
    }
}

#[derive(Serialize, Deserialize)]
struct GraphWire {
    carrier: usize,
    nodes: Vec<usize>,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphWire> for MixedStateGraph {
    type Error = Error;
    fn try_from(w: GraphWire) -> Result<Self> {
        MixedStateGraph::new(
            FiniteSet::new(w.carrier),
            w.nodes,
            w.edges.into_iter().map(|[a, b]| (a, b)),
        )
    }
}

impl From<MixedStateGraph> for GraphWire {
    fn from(g: MixedStateGraph) -> Self {
        GraphWire {
            carrier: g.carrier.size(),
            nodes: g.nodes.into_iter().collect(),
            edges: g.edges.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MixedStateGraph {
    /// Validates that edges join distinct nodes of the graph.
    pub fn new<N, E>(carrier: FiniteSet, nodes: N, edges: E) -> Result<MixedStateGraph>
    where
        N: IntoIterator<Item = usize>,
        E: IntoIterator<Item = (usize, usize)>,
    {
        let n = carrier.size();
        let nodes: BTreeSet<usize> = nodes.into_iter().collect();
        if let Some(&x) = nodes.iter().find(|&&x| x >= n) {
            return Err(Error::IndexOutOfRange(format!("node {x} in a carrier of size {n}")));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::NotMixedState(format!("loop edge at {a}")));
            }
            if !nodes.contains(&a) || !nodes.contains(&b) {
                return Err(Error::NotMixedState(format!(
                    "edge {{{a}, {b}}} has an endpoint that is not a node"
                )));
            }
            set.insert(ordered(a, b));
        }
        Ok(MixedStateGraph { carrier, nodes, edges: set })
    }

    pub fn empty(carrier: FiniteSet) -> MixedStateGraph {
        MixedStateGraph { carrier, nodes: BTreeSet::new(), edges: BTreeSet::new() }
    }

    /// Nodes without edges.
    pub fn discrete<N: IntoIterator<Item = usize>>(carrier: FiniteSet, nodes: N) -> Result<MixedStateGraph> {
        MixedStateGraph::new(carrier, nodes, std::iter::empty())
    }

    /// The state `rho = {(x, x') : x, x' in s}`.
    pub fn pure_state<N: IntoIterator<Item = usize>>(carrier: FiniteSet, s: N) -> Result<MixedStateGraph> {
        let nodes: BTreeSet<usize> = s.into_iter().collect();
        let edges: Vec<(usize, usize)> = pairs_of(&nodes).collect();
        MixedStateGraph::new(carrier, nodes, edges)
    }

    /// The discrete graph on the whole carrier.
    pub fn totally_mixed(carrier: FiniteSet) -> MixedStateGraph {
        let n = carrier.size();
        MixedStateGraph::discrete(carrier, 0..n).expect("all nodes in range")
    }

    /// The complete graph on the whole carrier.
    pub fn complete(carrier: FiniteSet) -> MixedStateGraph {
        let n = carrier.size();
        MixedStateGraph::pure_state(carrier, 0..n).expect("all nodes in range")
    }

    /// Reads a state off a relation `X -> X`.
    pub fn from_rel(r: &Rel) -> Result<MixedStateGraph> {
        if r.dom().size() != r.cod().size() {
            return Err(Error::ShapeMismatch(format!(
                "a state needs an endorelation, got {} -> {}",
                r.dom().size(),
                r.cod().size()
            )));
        }
        let mut nodes = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for (x, y) in r.pairs() {
            if !r.contains(y, x) {
                return Err(Error::NotMixedState(format!("({x}, {y}) present but ({y}, {x}) missing")));
            }
            if x == y {
                nodes.insert(x);
            } else {
                if !r.contains(x, x) || !r.contains(y, y) {
                    return Err(Error::NotMixedState(format!(
                        "({x}, {y}) present but the relation is not reflexive on {x} and {y}"
                    )));
                }
                edges.insert(ordered(x, y));
            }
        }
        Ok(MixedStateGraph { carrier: r.dom().clone(), nodes, edges })
    }

    /// The relation `X -> X` drawn by this graph.
    pub fn to_rel(&self) -> Rel {
        let mut r = Rel::empty(self.carrier.clone(), self.carrier.clone());
        for (a, b) in self.links() {
            r.set(a, b);
        }
        r
    }

    /// The same relation as a state `1 -> X x X`.
    pub fn to_state_rel(&self) -> Rel {
        let n = self.carrier.size();
        let mut r = Rel::empty(FiniteSet::unit(), self.carrier.square());
        for (a, b) in self.links() {
            r.set(0, a * n + b);
        }
        r
    }

    pub fn from_state_rel(carrier: FiniteSet, r: &Rel) -> Result<MixedStateGraph> {
        let n = carrier.size();
        if r.dom().size() != 1 || r.cod().size() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected a state 1 -> {n}x{n}, got {} -> {}",
                r.dom().size(),
                r.cod().size()
            )));
        }
        let flat = Rel::from_fn(carrier.clone(), carrier, |a, b| r.contains(0, a * n + b));
        MixedStateGraph::from_rel(&flat)
    }

    pub fn carrier(&self) -> &FiniteSet {
        &self.carrier
    }

    pub fn nodes(&self) -> &BTreeSet<usize> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_node(&self, x: usize) -> bool {
        self.nodes.contains(&x)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&ordered(a, b))
    }

    /// `(a, b)` in the underlying relation.
    pub fn linked(&self, a: usize, b: usize) -> bool {
        if a == b {
            self.has_node(a)
        } else {
            self.has_edge(a, b)
        }
    }

    /// All pairs of the underlying relation: nodes as `(x, x)` and every
    /// edge in both orientations.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes
            .iter()
            .map(|&x| (x, x))
            .chain(self.edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]))
    }

    pub fn with_carrier(mut self, carrier: FiniteSet) -> Result<MixedStateGraph> {
        if carrier.size() != self.carrier.size() {
            return Err(Error::CarrierMismatch(format!(
                "graph on {} elements relabelled with a set of size {}",
                self.carrier.size(),
                carrier.size()
            )));
        }
        self.carrier = carrier;
        Ok(self)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Causal states are exactly the nonempty ones.
    pub fn is_causal(&self) -> bool {
        !self.is_empty()
    }

    /// A clique on its node set.
    pub fn is_pure(&self) -> bool {
        let k = self.nodes.len();
        self.edges.len() == k * k.saturating_sub(1) / 2
    }

    pub fn is_discrete(&self) -> bool {
        self.edges.is_empty()
    }

    /// Same nodes, no edges.
    pub fn de_edged(&self) -> MixedStateGraph {
        MixedStateGraph { carrier: self.carrier.clone(), nodes: self.nodes.clone(), edges: BTreeSet::new() }
    }

    fn check_carrier(&self, other: &MixedStateGraph) -> Result<()> {
        if self.carrier.size() != other.carrier.size() {
            return Err(Error::CarrierMismatch(format!(
                "graphs on {} and {} elements",
                self.carrier.size(),
                other.carrier.size()
            )));
        }
        Ok(())
    }

    /// Graphviz rendering, nodes labelled by element names.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph {name} {{\n");
        for &x in &self.nodes {
            let _ = writeln!(out, "  n{x} [label=\"{}\"];", self.carrier.element_name(x).replace('"', "\\\""));
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "  n{a} -- n{b};");
        }
        out.push_str("}\n");
        out
    }
}

fn pairs_of(nodes: &BTreeSet<usize>) -> impl Iterator<Item = (usize, usize)> + '_ {
    nodes.iter().flat_map(move |&a| nodes.range(a + 1..).map(move |&b| (a, b)))
}

/// Every mixed state on an `n`-set, ordered by node mask then edge mask.
pub fn all_states(carrier: &FiniteSet) -> Vec<MixedStateGraph> {
    let n = carrier.size();
    assert!(n <= 5, "all_states: too many graphs on {n} elements");
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let nodes: BTreeSet<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let possible: Vec<(usize, usize)> = pairs_of(&nodes).collect();
        for emask in 0u64..(1 << possible.len()) {
            let edges = possible.iter().enumerate().filter(|(i, _)| emask & (1 << i) != 0).map(|(_, &e)| e);
            out.push(MixedStateGraph::new(carrier.clone(), nodes.iter().copied(), edges).expect("valid"));
        }
    }
    out
}

/// `rho <= tau`: same nodes, fewer edges.
pub fn purity_leq(rho: &MixedStateGraph, tau: &MixedStateGraph) -> Result<bool> {
    rho.check_carrier(tau)?;
    Ok(rho.nodes == tau.nodes && rho.edges.is_subset(&tau.edges))
}

/// Union of nodes and edges.
pub fn convex_combine(states: &[MixedStateGraph]) -> Result<MixedStateGraph> {
    let first = states.first().ok_or_else(|| Error::OutOfRange("no states to combine".into()))?;
    let mut out = first.clone();
    for s in &states[1..] {
        out.check_carrier(s)?;
        out.nodes.extend(s.nodes.iter().copied());
        out.edges.extend(s.edges.iter().copied());
    }
    Ok(out)
}

/// Same nodes, the missing edges.
pub fn complement_to_pure(rho: &MixedStateGraph) -> MixedStateGraph {
    let edges = pairs_of(&rho.nodes).filter(|e| !rho.edges.contains(e)).collect();
    MixedStateGraph { carrier: rho.carrier.clone(), nodes: rho.nodes.clone(), edges }
}

/// Splits a pure state on `n >= 3` nodes into `m` non-pure states with the
/// same nodes whose union is the original: the edge list is cut into `m`
/// contiguous chunks, the longer chunks last.
pub fn decompose_pure(p: &MixedStateGraph, m: usize) -> Result<Vec<MixedStateGraph>> {
    if !p.is_pure() {
        return Err(Error::OutOfRange("decompose_pure needs a pure state".into()));
    }
    let n = p.nodes.len();
    let edges: Vec<(usize, usize)> = p.edges.iter().copied().collect();
    if n < 3 {
        return Err(Error::OutOfRange(format!(
            "a pure state on {n} nodes has no decomposition into non-pure states"
        )));
    }
    if m < 2 || m > edges.len() {
        return Err(Error::OutOfRange(format!("m = {m} not in 2..={}", edges.len())));
    }
    let base = edges.len() / m;
    let extra = edges.len() % m;
    let mut out = Vec::with_capacity(m);
    let mut start = 0;
    for i in 0..m {
        let len = base + usize::from(i >= m - extra);
        out.push(MixedStateGraph {
            carrier: p.carrier.clone(),
            nodes: p.nodes.clone(),
            edges: edges[start..start + len].iter().copied().collect(),
        });
        start += len;
    }
    Ok(out)
}

/// The scalar `sigma^dagger . rho`, by relational composition.
pub fn evaluate(sigma: &MixedStateGraph, rho: &MixedStateGraph) -> Result<bool> {
    sigma.check_carrier(rho)?;
    Ok(rho.to_state_rel().then(&sigma.to_state_rel().dagger())?.is_top())
}

/// An environment `E` and a relation `f : 1 -> E x X` whose pure map,
/// with `E` traced out, is `rho`. A nonempty pure state needs one
/// environment element; otherwise there is one per node and one per edge,
/// each related to the members of that node or edge.
pub fn purify_state(rho: &MixedStateGraph) -> (FiniteSet, Rel) {
    let x = rho.carrier();
    let cliques: Vec<Vec<usize>> = if rho.is_empty() {
        Vec::new()
    } else if rho.is_pure() {
        vec![rho.nodes.iter().copied().collect()]
    } else {
        rho.nodes
            .iter()
            .map(|&a| vec![a])
            .chain(rho.edges.iter().map(|&(a, b)| vec![a, b]))
            .collect()
    };
    let env = FiniteSet::new(cliques.len()).with_label("E");
    let mut f = Rel::empty(FiniteSet::unit(), FiniteSet::pair(&env, x));
    for (e, clique) in cliques.iter().enumerate() {
        for &a in clique {
            f.set(0, e * x.size() + a);
        }
    }
    (env, f)
}

/// A CPM map, held both as a relation `X x X -> Y x Y` and as its Choi
/// graph over `X x Y`. Serialised as its types and Choi graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CpmWire", into = "CpmWire")]
pub struct CpmMap {
    dom: FiniteSet,
    cod: FiniteSet,
    rel: Rel,
    graph: MixedStateGraph,
}

#[derive(Serialize, Deserialize)]
struct CpmWire {
    dom: usize,
    cod: usize,
    choi: MixedStateGraph,
}

impl TryFrom<CpmWire> for CpmMap {
    type Error = Error;
    fn try_from(w: CpmWire) -> Result<Self> {
        CpmMap::from_graph(FiniteSet::new(w.dom), FiniteSet::new(w.cod), w.choi)
    }
}

impl From<CpmMap> for CpmWire {
    fn from(m: CpmMap) -> Self {
        CpmWire { dom: m.dom.size(), cod: m.cod.size(), choi: m.graph }
    }
}

impl PartialEq for CpmMap {
    fn eq(&self, other: &Self) -> bool {
        self.dom.size() == other.dom.size() && self.cod.size() == other.cod.size() && self.rel == other.rel
    }
}

impl Eq for CpmMap {}

/// `((x, x'), (y, y'))` in `r` iff `((x, y), (x', y'))` in the result.
fn bend(r: &Rel, n: usize, m: usize) -> Rel {
    let xy = FiniteSet::new(n * m);
    let mut out = Rel::empty(xy.clone(), xy);
    for (xx, yy) in r.pairs() {
        let (x, x2) = (xx / n, xx % n);
        let (y, y2) = (yy / m, yy % m);
        out.set(x * m + y, x2 * m + y2);
    }
    out
}

fn unbend(c: &Rel, dom: &FiniteSet, cod: &FiniteSet) -> Rel {
    let (n, m) = (dom.size(), cod.size());
    let mut out = Rel::empty(dom.square(), cod.square());
    for (a, b) in c.pairs() {
        let (x, y) = (a / m, a % m);
        let (x2, y2) = (b / m, b % m);
        out.set(x * n + x2, y * m + y2);
    }
    out
}

impl CpmMap {
    /// Accepts a relation `X x X -> Y x Y` whose Choi relation is a mixed
    /// state on `X x Y`.
    pub fn from_rel(dom: FiniteSet, cod: FiniteSet, rel: &Rel) -> Result<CpmMap> {
        let (n, m) = (dom.size(), cod.size());
        if rel.dom().size() != n * n || rel.cod().size() != m * m {
            return Err(Error::ShapeMismatch(format!(
                "a CPM map {n} -> {m} needs a relation {} -> {}, got {} -> {}",
                n * n,
                m * m,
                rel.dom().size(),
                rel.cod().size()
            )));
        }
        let choi = bend(rel, n, m);
        let graph = MixedStateGraph::from_rel(&choi)?.with_carrier(FiniteSet::pair(&dom, &cod))?;
        let rel = rel.retyped(dom.square(), cod.square())?;
        Ok(CpmMap { dom, cod, rel, graph })
    }

    /// Accepts a Choi graph over `X x Y`.
    pub fn from_graph(dom: FiniteSet, cod: FiniteSet, graph: MixedStateGraph) -> Result<CpmMap> {
        if graph.carrier().size() != dom.size() * cod.size() {
            return Err(Error::CarrierMismatch(format!(
                "Choi graph on {} elements for a map {} -> {}",
                graph.carrier().size(),
                dom.size(),
                cod.size()
            )));
        }
        let rel = unbend(&graph.to_rel(), &dom, &cod);
        let graph = graph.with_carrier(FiniteSet::pair(&dom, &cod))?;
        Ok(CpmMap { dom, cod, rel, graph })
    }

    /// A state as a map out of the tensor unit.
    pub fn state(rho: &MixedStateGraph) -> CpmMap {
        CpmMap::from_graph(FiniteSet::unit(), rho.carrier().clone(), rho.clone()).expect("1 x X has |X| elements")
    }

    /// An effect `X -> 1` with the given graph over `X`.
    pub fn effect(sigma: &MixedStateGraph) -> CpmMap {
        CpmMap::from_graph(sigma.carrier().clone(), FiniteSet::unit(), sigma.clone()).expect("X x 1 has |X| elements")
    }

    /// Reads a map `1 -> X` back as a state on `X`.
    pub fn as_state(&self) -> Result<MixedStateGraph> {
        if self.dom.size() != 1 {
            return Err(Error::ShapeMismatch(format!("map out of a set of size {} is not a state", self.dom.size())));
        }
        self.graph.clone().with_carrier(self.cod.clone())
    }

    /// Reads a map `X -> 1` as a graph over `X`.
    pub fn as_effect(&self) -> Result<MixedStateGraph> {
        if self.cod.size() != 1 {
            return Err(Error::ShapeMismatch(format!("map into a set of size {} is not an effect", self.cod.size())));
        }
        self.graph.clone().with_carrier(self.dom.clone())
    }

    pub fn identity(x: &FiniteSet) -> CpmMap {
        pure_map(&Rel::identity(x))
    }

    pub fn dom(&self) -> &FiniteSet {
        &self.dom
    }

    pub fn cod(&self) -> &FiniteSet {
        &self.cod
    }

    pub fn rel(&self) -> &Rel {
        &self.rel
    }

    pub fn graph(&self) -> &MixedStateGraph {
        &self.graph
    }

    /// Same relation with relabelled (equal-sized) domain and codomain.
    pub fn with_types(&self, dom: FiniteSet, cod: FiniteSet) -> Result<CpmMap> {
        if dom.size() != self.dom.size() || cod.size() != self.cod.size() {
            return Err(Error::ShapeMismatch(format!(
                "cannot retype {} -> {} as {} -> {}",
                self.dom.size(),
                self.cod.size(),
                dom.size(),
                cod.size()
            )));
        }
        Ok(CpmMap {
            rel: self.rel.retyped(dom.square(), cod.square())?,
            graph: self.graph.clone().with_carrier(FiniteSet::pair(&dom, &cod))?,
            dom,
            cod,
        })
    }

    /// Both stored views describe the same relation.
    pub fn is_consistent(&self) -> bool {
        let (n, m) = (self.dom.size(), self.cod.size());
        bend(&self.rel, n, m) == self.graph.to_rel() && unbend(&self.graph.to_rel(), &self.dom, &self.cod) == self.rel
    }

    pub fn dagger(&self) -> CpmMap {
        let (n, m) = (self.dom.size(), self.cod.size());
        let carrier = FiniteSet::pair(&self.cod, &self.dom);
        let flip = |a: usize| (a % m) * n + a / m;
        let graph = MixedStateGraph {
            carrier,
            nodes: self.graph.nodes.iter().map(|&a| flip(a)).collect(),
            edges: self.graph.edges.iter().map(|&(a, b)| ordered(flip(a), flip(b))).collect(),
        };
        CpmMap { dom: self.cod.clone(), cod: self.dom.clone(), rel: self.rel.dagger(), graph }
    }

    /// Links of the Choi graph as `(x, x', y, y')`.
    fn links(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let m = self.cod.size();
        self.graph.links().map(move |(a, b)| (a / m, b / m, a % m, b % m))
    }

    /// `discard . self = discard`.
    pub fn is_causal(&self) -> bool {
        compose_relational(self, &discard(&self.cod))
            .map(|d| d == discard(&self.dom))
            .unwrap_or(false)
    }

    /// Causality read off the Choi graph: every `x` has a node `[x, y]`,
    /// and no edge joins `[x, y]` to `[x', y]` with `x != x'`.
    pub fn is_causal_by_graph(&self) -> bool {
        let m = self.cod.size();
        let covered: BTreeSet<usize> = self.graph.nodes.iter().map(|&a| a / m).collect();
        covered.len() == self.dom.size() && self.graph.edges.iter().all(|&(a, b)| a % m != b % m)
    }
}

/// `f x f` as a CPM map.
pub fn pure_map(f: &Rel) -> CpmMap {
    CpmMap::from_rel(f.dom().clone(), f.cod().clone(), &f.tensor(f)).expect("doubled relations are CPM")
}

/// The cap `X x X -> 1` as a CPM map `X -> 1`.
pub fn discard(x: &FiniteSet) -> CpmMap {
    CpmMap::from_rel(x.clone(), FiniteSet::unit(), &cap(x)).expect("the cap is CPM")
}

/// The discrete graph on `X`.
pub fn totally_mixed(x: &FiniteSet) -> MixedStateGraph {
    MixedStateGraph::totally_mixed(x.clone())
}

fn check_apply(m: &CpmMap, rho: &MixedStateGraph) -> Result<()> {
    if m.dom.size() != rho.carrier().size() {
        return Err(Error::CarrierMismatch(format!(
            "map out of a set of size {} applied to a state on {} elements",
            m.dom.size(),
            rho.carrier().size()
        )));
    }
    Ok(())
}

/// Application by the graph rules: a node or edge `[x,y] -- [x',y']` of
/// the Choi graph lands on `y`, or `{y, y'}`, whenever `(x, x')` is a node or
/// edge of `rho`.
pub fn apply(m: &CpmMap, rho: &MixedStateGraph) -> Result<MixedStateGraph> {
    check_apply(m, rho)?;
    let mut out = MixedStateGraph::empty(m.cod.clone());
    for (x, x2, y, y2) in m.links() {
        if rho.linked(x, x2) {
            if y == y2 {
                out.nodes.insert(y);
            } else {
                out.edges.insert(ordered(y, y2));
            }
        }
    }
    Ok(out)
}

/// Application by relational composition.
pub fn apply_relational(m: &CpmMap, rho: &MixedStateGraph) -> Result<MixedStateGraph> {
    check_apply(m, rho)?;
    let out = rho.to_state_rel().then(&m.rel)?;
    MixedStateGraph::from_state_rel(m.cod.clone(), &out)
}

fn check_compose(r: &CpmMap, s: &CpmMap) -> Result<()> {
    if r.cod.size() != s.dom.size() {
        return Err(Error::CompositionMismatch { left: r.cod.to_string(), right: s.dom.to_string() });
    }
    Ok(())
}

/// Composition `r` then `s` by the graph rules: links `[x,y] -- [x',y']` of
/// `r` and `[y,z] -- [y',z']` of `s` sharing `(y, y')` give the link
/// `[x,z] -- [x',z']`.
pub fn compose_cpm(r: &CpmMap, s: &CpmMap) -> Result<CpmMap> {
    check_compose(r, s)?;
    let mut by_middle: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (y, y2, z, z2) in s.links() {
        by_middle.entry((y, y2)).or_default().push((z, z2));
    }
    let p = s.cod.size();
    let mut graph = MixedStateGraph::empty(FiniteSet::pair(&r.dom, &s.cod));
    for (x, x2, y, y2) in r.links() {
        for &(z, z2) in by_middle.get(&(y, y2)).into_iter().flatten() {
            let (a, b) = (x * p + z, x2 * p + z2);
            if a == b {
                graph.nodes.insert(a);
            } else {
                graph.edges.insert(ordered(a, b));
            }
        }
    }
    CpmMap::from_graph(r.dom.clone(), s.cod.clone(), graph)
}

/// Composition `r` then `s` of the relation views.
pub fn compose_relational(r: &CpmMap, s: &CpmMap) -> Result<CpmMap> {
    check_compose(r, s)?;
    CpmMap::from_rel(r.dom.clone(), s.cod.clone(), &r.rel.then(&s.rel)?)
}

/// Tensor product: the relation views are tensored, then the doubled wires
/// `X X X' X'` are regrouped as `X X' X X'`.
pub fn tensor_cpm(r: &CpmMap, s: &CpmMap) -> CpmMap {
    let doubled = r.rel.tensor(&s.rel);
    let (x, x2, y, y2) = (&r.dom, &s.dom, &r.cod, &s.cod);
    let regroup_in = permutation(&[x, x2, x, x2], &[0, 2, 1, 3]);
    let regroup_out = permutation(&[y, y, y2, y2], &[0, 2, 1, 3]);
    let rel = regroup_in
        .then(&doubled)
        .and_then(|t| t.then(&regroup_out))
        .expect("regrouped shapes agree");
    CpmMap::from_rel(FiniteSet::pair(x, x2), FiniteSet::pair(y, y2), &rel).expect("tensors of CPM maps are CPM")
}

/// Left-nested tensor of a list of maps; the empty list gives the identity
/// on the tensor unit.
pub fn tensor_all(maps: &[CpmMap]) -> CpmMap {
    let mut acc = CpmMap::identity(&FiniteSet::unit());
    for (i, m) in maps.iter().enumerate() {
        acc = if i == 0 { m.clone() } else { tensor_cpm(&acc, m) };
    }
    let doms: Vec<&FiniteSet> = maps.iter().map(|m| m.dom()).collect();
    let cods: Vec<&FiniteSet> = maps.iter().map(|m| m.cod()).collect();
    acc.with_types(FiniteSet::product(&doms), FiniteSet::product(&cods)).expect("same sizes")
}

/// The map `X_1 x ... x X_k -> product of kept factors` that discards every
/// factor whose `keep` flag is false.
pub fn discard_factors(factors: &[&FiniteSet], keep: &[bool]) -> CpmMap {
    assert_eq!(factors.len(), keep.len(), "one keep flag per factor");
    let parts: Vec<CpmMap> = factors
        .iter()
        .zip(keep)
        .map(|(f, &k)| if k { CpmMap::identity(f) } else { discard(f) })
        .collect();
    let kept: Vec<&FiniteSet> = factors.iter().zip(keep).filter(|(_, &k)| k).map(|(f, _)| *f).collect();
    let t = tensor_all(&parts);
    let dom = t.dom().clone();
    t.with_types(dom, FiniteSet::product(&kept)).expect("discarded factors have size 1")
}
