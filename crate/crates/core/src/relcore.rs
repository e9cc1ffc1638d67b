//! The category of finite sets and relations.
//!
//! Objects are [`FiniteSet`]s whose elements are the indices `0..size`.
//! Morphisms are [`Rel`]s stored as dense bitset rows, one row per domain
//! element. Products of sets are flattened row-major with the left factor
//! most significant (see [`ProductIndex`]); this makes the associator and
//! the unitors identities on flat indices, so `(X x Y) x Z` and
//! `X x (Y x Z)` share one encoding.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FiniteSetWire", into = "FiniteSetWire")]
pub struct FiniteSet {
    size: usize,
    label: Option<String>,
    names: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct FiniteSetWire {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

impl TryFrom<FiniteSetWire> for FiniteSet {
    type Error = Error;
    fn try_from(w: FiniteSetWire) -> Result<Self> {
        let mut set = FiniteSet::new(w.size);
        if let Some(names) = w.names {
            set = set.with_names(names)?;
        }
        if let Some(label) = w.label {
            set = set.with_label(label);
        }
        Ok(set)
    }
}

impl From<FiniteSet> for FiniteSetWire {
    fn from(s: FiniteSet) -> Self {
        FiniteSetWire { size: s.size, label: s.label, names: s.names }
    }
}

impl FiniteSet {
    pub fn new(size: usize) -> Self {
        FiniteSet { size, label: None, names: None }
    }

    /// The tensor unit.
    pub fn unit() -> Self {
        FiniteSet::new(1)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.size {
            return Err(Error::InvalidSet(format!(
                "{} names given for a set of size {}",
                names.len(),
                self.size
            )));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::InvalidSet("duplicate element names".into()));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn element_name(&self, i: usize) -> String {
        match &self.names {
            Some(n) => n[i].clone(),
            None => i.to_string(),
        }
    }

    /// Cartesian product; names and labels are carried over when every
    /// factor has them.
    pub fn product(factors: &[&FiniteSet]) -> FiniteSet {
        let index = ProductIndex::new(factors.iter().map(|f| f.size).collect());
        let mut out = FiniteSet::new(index.len());
        if factors.iter().all(|f| f.label.is_some()) && !factors.is_empty() {
            let labels: Vec<&str> = factors.iter().filter_map(|f| f.label()).collect();
            out.label = Some(labels.join("x"));
        }
        if factors.iter().all(|f| f.names.is_some()) && !factors.is_empty() && out.size <= 4096 {
            let names = (0..out.size)
                .map(|flat| {
                    let parts: Vec<String> = index
                        .decode(flat)
                        .iter()
                        .zip(factors)
                        .map(|(&i, f)| f.element_name(i))
                        .collect();
                    format!("({})", parts.join(","))
                })
                .collect();
            out.names = Some(names);
        }
        out
    }

    pub fn pair(a: &FiniteSet, b: &FiniteSet) -> FiniteSet {
        FiniteSet::product(&[a, b])
    }

    pub fn square(&self) -> FiniteSet {
        FiniteSet::product(&[self, self])
    }

    fn describe(&self) -> String {
        match &self.label {
            Some(l) => format!("{l}[{}]", self.size),
            None => format!("set of size {}", self.size),
        }
    }
}

impl fmt::Display for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Mixed-radix flattening of a product of finite sets, left factor most
/// significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductIndex {
    radices: Vec<usize>,
}

impl ProductIndex {
    pub fn new(radices: Vec<usize>) -> Self {
        ProductIndex { radices }
    }

    pub fn of(factors: &[&FiniteSet]) -> Self {
        ProductIndex::new(factors.iter().map(|f| f.size()).collect())
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn len(&self) -> usize {
        self.radices.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.radices.len());
        digits
            .iter()
            .zip(&self.radices)
            .fold(0, |acc, (&d, &r)| {
                debug_assert!(d < r);
                acc * r + d
            })
    }

    pub fn decode(&self, mut flat: usize) -> Vec<usize> {
        let mut digits = vec![0; self.radices.len()];
        for (slot, &r) in digits.iter_mut().zip(&self.radices).rev() {
            *slot = flat % r;
            flat /= r;
        }
        digits
    }

    /// Iterates over all tuples in flat order.
    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(move |i| self.decode(i))
    }
}

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// A relation between two finite sets.
#[derive(Clone)]
pub struct Rel {
    dom: FiniteSet,
    cod: FiniteSet,
    stride: usize,
    bits: Vec<u64>,
}

impl PartialEq for Rel {
    fn eq(&self, other: &Self) -> bool {
        self.dom.size == other.dom.size
            && self.cod.size == other.cod.size
            && self.bits == other.bits
    }
}

impl Eq for Rel {}

impl std::hash::Hash for Rel {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.dom.size.hash(state);
        self.cod.size.hash(state);
        self.bits.hash(state);
    }
}

impl fmt::Debug for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rel({} -> {}) {:?}", self.dom.size, self.cod.size, self.pairs().collect::<Vec<_>>())
    }
}

impl Rel {
    pub fn empty(dom: FiniteSet, cod: FiniteSet) -> Rel {
        let stride = words_for(cod.size);
        let bits = vec![0; stride * dom.size];
        Rel { dom, cod, stride, bits }
    }

    pub fn full(dom: FiniteSet, cod: FiniteSet) -> Rel {
        let mut r = Rel::empty(dom, cod);
        for x in 0..r.dom.size {
            for y in 0..r.cod.size {
                r.set(x, y);
            }
        }
        r
    }

    pub fn identity(x: &FiniteSet) -> Rel {
        let mut r = Rel::empty(x.clone(), x.clone());
        for i in 0..x.size {
            r.set(i, i);
        }
        r
    }

    pub fn from_pairs<I>(dom: FiniteSet, cod: FiniteSet, pairs: I) -> Result<Rel>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut r = Rel::empty(dom, cod);
        for (x, y) in pairs {
            if x >= r.dom.size || y >= r.cod.size {
                return Err(Error::IndexOutOfRange(format!(
                    "pair ({x}, {y}) outside {} x {}",
                    r.dom.size, r.cod.size
                )));
            }
            r.set(x, y);
        }
        Ok(r)
    }

    /// Builds a relation from a predicate on all pairs.
    pub fn from_fn(dom: FiniteSet, cod: FiniteSet, mut f: impl FnMut(usize, usize) -> bool) -> Rel {
        let mut r = Rel::empty(dom, cod);
        for x in 0..r.dom.size {
            for y in 0..r.cod.size {
                if f(x, y) {
                    r.set(x, y);
                }
            }
        }
        r
    }

    /// A state `1 -> X` given by a subset.
    pub fn state<I: IntoIterator<Item = usize>>(x: &FiniteSet, subset: I) -> Result<Rel> {
        Rel::from_pairs(FiniteSet::unit(), x.clone(), subset.into_iter().map(|s| (0, s)))
    }

    /// An effect `X -> 1` given by a subset.
    pub fn effect<I: IntoIterator<Item = usize>>(x: &FiniteSet, subset: I) -> Result<Rel> {
        Rel::from_pairs(x.clone(), FiniteSet::unit(), subset.into_iter().map(|s| (s, 0)))
    }

    pub fn top() -> Rel {
        Rel::identity(&FiniteSet::unit())
    }

    pub fn bottom() -> Rel {
        Rel::empty(FiniteSet::unit(), FiniteSet::unit())
    }

    pub fn dom(&self) -> &FiniteSet {
        &self.dom
    }

    pub fn cod(&self) -> &FiniteSet {
        &self.cod
    }

    pub(crate) fn set(&mut self, x: usize, y: usize) {
        self.bits[x * self.stride + y / WORD] |= 1u64 << (y % WORD);
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.dom.size
            && y < self.cod.size
            && self.bits[x * self.stride + y / WORD] & (1u64 << (y % WORD)) != 0
    }

    fn row(&self, x: usize) -> &[u64] {
        &self.bits[x * self.stride..(x + 1) * self.stride]
    }

    /// Image of a single domain element.
    pub fn image_of(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        let row = self.row(x);
        row.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * WORD + b)
            })
        })
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dom.size).flat_map(move |x| self.image_of(x).map(move |y| (x, y)))
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Scalars: `true` iff this is the scalar top.
    pub fn is_top(&self) -> bool {
        self.dom.size == 1 && self.cod.size == 1 && self.contains(0, 0)
    }

    /// The elements of the codomain reached from any domain element.
    pub fn range(&self) -> BTreeSet<usize> {
        self.pairs().map(|(_, y)| y).collect()
    }

    pub fn domain_of_definition(&self) -> BTreeSet<usize> {
        (0..self.dom.size).filter(|&x| self.row(x).iter().any(|&w| w != 0)).collect()
    }

    /// Same pairs, new (equal-sized) domain and codomain.
    pub fn retyped(&self, dom: FiniteSet, cod: FiniteSet) -> Result<Rel> {
        if dom.size != self.dom.size || cod.size != self.cod.size {
            return Err(Error::ShapeMismatch(format!(
                "cannot retype {} -> {} as {} -> {}",
                self.dom.size, self.cod.size, dom.size, cod.size
            )));
        }
        Ok(Rel { dom, cod, stride: self.stride, bits: self.bits.clone() })
    }

    /// Diagrammatic composition: `self : X -> Y` followed by `next : Y -> Z`.
    pub fn then(&self, next: &Rel) -> Result<Rel> {
        if self.cod.size != next.dom.size {
            return Err(Error::CompositionMismatch {
                left: self.cod.describe(),
                right: next.dom.describe(),
            });
        }
        let mut out = Rel::empty(self.dom.clone(), next.cod.clone());
        for x in 0..self.dom.size {
            let base = x * out.stride;
            for y in self.image_of(x) {
                let src = next.row(y);
                for (dst, &w) in out.bits[base..base + out.stride].iter_mut().zip(src) {
                    *dst |= w;
                }
            }
        }
        Ok(out)
    }

    pub fn dagger(&self) -> Rel {
        let mut out = Rel::empty(self.cod.clone(), self.dom.clone());
        for (x, y) in self.pairs() {
            out.set(y, x);
        }
        out
    }

    pub fn tensor(&self, other: &Rel) -> Rel {
        let dom = FiniteSet::pair(&self.dom, &other.dom);
        let cod = FiniteSet::pair(&self.cod, &other.cod);
        let (dn, cn) = (other.dom.size, other.cod.size);
        let mut out = Rel::empty(dom, cod);
        for (x, y) in self.pairs() {
            for (x2, y2) in other.pairs() {
                out.set(x * dn + x2, y * cn + y2);
            }
        }
        out
    }

    fn check_same_shape(&self, other: &Rel) -> Result<()> {
        if self.dom.size != other.dom.size || self.cod.size != other.cod.size {
            return Err(Error::ShapeMismatch(format!(
                "{} -> {} vs {} -> {}",
                self.dom.size, self.cod.size, other.dom.size, other.cod.size
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Rel, f: impl Fn(u64, u64) -> u64) -> Result<Rel> {
        self.check_same_shape(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect();
        Ok(Rel { dom: self.dom.clone(), cod: self.cod.clone(), stride: self.stride, bits })
    }

    /// Superposition.
    pub fn union(&self, other: &Rel) -> Result<Rel> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Rel) -> Result<Rel> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn complement(&self) -> Rel {
        Rel::from_fn(self.dom.clone(), self.cod.clone(), |x, y| !self.contains(x, y))
    }

    pub fn is_subset_of(&self, other: &Rel) -> Result<bool> {
        self.check_same_shape(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| a & !b == 0))
    }

    pub fn is_total(&self) -> bool {
        (0..self.dom.size).all(|x| self.row(x).iter().any(|&w| w != 0))
    }

    /// Every domain element has at most one image.
    pub fn is_partial_function(&self) -> bool {
        (0..self.dom.size).all(|x| self.image_of(x).nth(1).is_none())
    }

    pub fn is_function(&self) -> bool {
        self.is_total() && self.is_partial_function()
    }

    pub fn is_bijection(&self) -> bool {
        self.is_function() && self.dagger().is_function()
    }

    /// `dagger(self) . self = id`, checked by composition.
    pub fn is_isometry(&self) -> bool {
        self.then(&self.dagger()).map(|r| r == Rel::identity(&self.dom)).unwrap_or(false)
    }

    /// The dagger is a surjective partial function.
    pub fn is_isometry_by_criterion(&self) -> bool {
        let d = self.dagger();
        d.is_partial_function() && d.range().len() == self.dom.size
    }

    pub fn is_unitary(&self) -> bool {
        self.is_isometry() && self.dagger().is_isometry()
    }

    pub fn is_symmetric(&self) -> bool {
        self.dom.size == self.cod.size && self.pairs().all(|(x, y)| self.contains(y, x))
    }

    pub fn is_transitive(&self) -> bool {
        self.dom.size == self.cod.size
            && self.then(self).and_then(|rr| rr.is_subset_of(self)).unwrap_or(false)
    }

    /// Number of pairs, as a boolean-matrix view.
    pub fn to_matrix(&self) -> Vec<Vec<bool>> {
        (0..self.dom.size)
            .map(|x| (0..self.cod.size).map(|y| self.contains(x, y)).collect())
            .collect()
    }
}

/// Relational composition `r` then `s`.
pub fn compose(r: &Rel, s: &Rel) -> Result<Rel> {
    r.then(s)
}

/// The cup `1 -> X x X`, `{(*, (x, x))}`.
pub fn cup(x: &FiniteSet) -> Rel {
    let n = x.size();
    Rel::from_fn(FiniteSet::unit(), x.square(), |_, p| p / n.max(1) == p % n.max(1) && p < n * n)
}

/// The cap `X x X -> 1`.
pub fn cap(x: &FiniteSet) -> Rel {
    cup(x).dagger()
}

/// The symmetry `X x Y -> Y x X`.
pub fn swap(x: &FiniteSet, y: &FiniteSet) -> Rel {
    permutation(&[x, y], &[1, 0])
}

/// Wire permutation: output factor `k` is input factor `order[k]`.
pub fn permutation(factors: &[&FiniteSet], order: &[usize]) -> Rel {
    assert_eq!(factors.len(), order.len(), "permutation arity");
    let input = ProductIndex::of(factors);
    let out_factors: Vec<&FiniteSet> = order.iter().map(|&i| factors[i]).collect();
    let output = ProductIndex::of(&out_factors);
    let mut r = Rel::empty(FiniteSet::product(factors), FiniteSet::product(&out_factors));
    for flat in 0..input.len() {
        let digits = input.decode(flat);
        let permuted: Vec<usize> = order.iter().map(|&i| digits[i]).collect();
        r.set(flat, output.encode(&permuted));
    }
    r
}

/// Bends both wires of `r : X -> Y` using cups and caps:
/// `(cap_Y x id_X) . (id_Y x r x id_X) . (id_Y x cup_X)`, a map `Y -> X`.
pub fn transpose(r: &Rel) -> Result<Rel> {
    let x = r.dom().clone();
    let y = r.cod().clone();
    let idx = Rel::identity(&x);
    let idy = Rel::identity(&y);
    // Y ~ Y x 1 -> Y x (X x X)
    let step1 = idy.tensor(&cup(&x)).retyped(y.clone(), FiniteSet::product(&[&y, &x, &x]))?;
    // Y x X x X -> Y x Y x X
    let step2 = idy.tensor(r).tensor(&idx).retyped(
        FiniteSet::product(&[&y, &x, &x]),
        FiniteSet::product(&[&y, &y, &x]),
    )?;
    // Y x Y x X -> 1 x X ~ X
    let step3 = cap(&y).tensor(&idx).retyped(FiniteSet::product(&[&y, &y, &x]), x.clone())?;
    step1.then(&step2)?.then(&step3)
}

/// Number of states of `X x Y` (|X| = n, |Y| = m) of the form `A x B`,
/// by enumeration of all `2^(nm)` subsets.
pub fn separable_state_count(n: usize, m: usize) -> usize {
    let cells = n * m;
    assert!(cells <= 20, "separable_state_count: 2^{cells} subsets is too many");
    (0u64..(1u64 << cells))
        .filter(|&mask| {
            let has = |x: usize, y: usize| mask & (1 << (x * m + y)) != 0;
            let a: Vec<usize> = (0..n).filter(|&x| (0..m).any(|y| has(x, y))).collect();
            let b: Vec<usize> = (0..m).filter(|&y| (0..n).any(|x| has(x, y))).collect();
            let rect = a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y)));
            rect.count() == mask.count_ones() as usize
        })
        .count()
}

/// The count `2^(n+m-2) + 1` quoted in some presentations of fRel; kept for
/// comparison against [`separable_state_count`], which it does not match.
pub fn quoted_separable_formula(n: usize, m: usize) -> usize {
    (1usize << (n + m).saturating_sub(2)) + 1
}

#[derive(Serialize, Deserialize)]
struct RelWire {
    dom: FiniteSet,
    cod: FiniteSet,
    pairs: Vec<[usize; 2]>,
}

impl Serialize for Rel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RelWire {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            pairs: self.pairs().map(|(x, y)| [x, y]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = RelWire::deserialize(deserializer)?;
        Rel::from_pairs(wire.dom, wire.cod, wire.pairs.into_iter().map(|[x, y]| (x, y)))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize) -> FiniteSet {
        FiniteSet::new(n)
    }

    fn chase(r: &Rel, s: &Rel) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for (x, y) in r.pairs() {
            for (y2, z) in s.pairs() {
                if y == y2 {
                    out.insert((x, z));
                }
            }
        }
        out
    }

    #[test]
    fn identity_is_neutral() {
        let r = Rel::from_pairs(set(2), set(3), [(0, 1), (1, 2), (1, 0)]).unwrap();
        assert_eq!(Rel::identity(&set(2)).then(&r).unwrap(), r);
        assert_eq!(r.then(&Rel::identity(&set(3))).unwrap(), r);
    }

    #[test]
    fn swap_squares_to_identity() {
        let s = Rel::from_pairs(set(2), set(2), [(0, 1), (1, 0)]).unwrap();
        let ss = s.then(&s).unwrap();
        let expected: BTreeSet<_> = chase(&s, &s);
        assert_eq!(ss.pairs().collect::<BTreeSet<_>>(), expected);
        assert_eq!(ss, Rel::identity(&set(2)));
    }

    #[test]
    fn cap_after_cup_is_top() {
        let x = set(2);
        let scalar = cup(&x).then(&cap(&x)).unwrap();
        assert_eq!(scalar.pairs().collect::<BTreeSet<_>>(), chase(&cup(&x), &cap(&x)));
        assert!(scalar.is_top());
        assert!(!cup(&set(0)).then(&cap(&set(0))).unwrap().is_top());
        assert_eq!(cup(&set(0)).then(&cap(&set(0))).unwrap(), Rel::bottom());
    }

    #[test]
    fn mismatched_composition_names_both_sets() {
        let r = Rel::empty(set(2), set(3).with_label("Y"));
        let s = Rel::empty(set(2).with_label("W"), set(2));
        let err = r.then(&s).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Y[3]") && msg.contains("W[2]"), "{msg}");
    }

    #[test]
    fn dagger_examples() {
        let r = Rel::from_pairs(set(2), set(2), [(0, 1)]).unwrap();
        assert_eq!(r.dagger().pairs().collect::<Vec<_>>(), vec![(1, 0)]);
        assert_eq!(Rel::identity(&set(4)).dagger(), Rel::identity(&set(4)));
    }

    #[test]
    fn tensor_examples() {
        let a = Rel::from_pairs(set(2), set(2), [(0, 0)]).unwrap();
        let b = Rel::from_pairs(set(2), set(2), [(0, 1)]).unwrap();
        let t = a.tensor(&b);
        let pi = ProductIndex::new(vec![2, 2]);
        assert_eq!(t.pairs().collect::<Vec<_>>(), vec![(pi.encode(&[0, 0]), pi.encode(&[0, 1]))]);
        assert_eq!(
            Rel::identity(&set(2)).tensor(&Rel::identity(&set(3))),
            Rel::identity(&set(6))
        );
        let r = Rel::from_pairs(set(2), set(3), [(0, 2), (1, 1)]).unwrap();
        assert_eq!(Rel::top().tensor(&r), r);
        assert_eq!(r.tensor(&Rel::top()), r);
    }

    #[test]
    fn lattice_examples() {
        let r = Rel::from_pairs(set(2), set(2), [(0, 1)]).unwrap();
        let empty = Rel::empty(set(2), set(2));
        assert_eq!(r.union(&empty).unwrap(), r);
        assert!(r.intersection(&r.complement()).unwrap().is_empty());
        let a = Rel::from_pairs(set(2), set(2), [(0, 0)]).unwrap();
        let b = Rel::from_pairs(set(2), set(2), [(1, 1)]).unwrap();
        assert_eq!(a.union(&b).unwrap(), Rel::identity(&set(2)));
        assert!(matches!(a.union(&Rel::empty(set(3), set(2))), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn cup_examples_and_snake() {
        assert_eq!(cup(&set(1)).pairs().collect::<Vec<_>>(), vec![(0, 0)]);
        let x = set(3);
        let id = Rel::identity(&x);
        // X ~ X x 1 -> X x X x X -> 1 x X ~ X
        let left = id.tensor(&cup(&x)).retyped(x.clone(), FiniteSet::product(&[&x, &x, &x])).unwrap();
        let right = cap(&x).tensor(&id).retyped(FiniteSet::product(&[&x, &x, &x]), x.clone()).unwrap();
        assert_eq!(left.then(&right).unwrap(), id);
    }

    #[test]
    fn superposition_state_is_isometric_but_not_unitary() {
        let psi = Rel::state(&set(2), [0, 1]).unwrap();
        assert_eq!(psi.then(&psi.dagger()).unwrap(), Rel::identity(&set(1)));
        assert!(psi.is_isometry() && psi.is_isometry_by_criterion());
        assert_ne!(psi.dagger().then(&psi).unwrap(), Rel::identity(&set(2)));
        assert!(!psi.is_unitary());
        let effect = psi.dagger();
        assert!(!effect.is_isometry() && !effect.is_isometry_by_criterion());
        assert!(Rel::identity(&set(3)).is_isometry() && Rel::identity(&set(3)).is_unitary());
    }

    #[test]
    fn isometry_criteria_agree_on_all_3x3_relations() {
        for mask in 0u32..512 {
            let r = Rel::from_fn(set(3), set(3), |x, y| mask & (1 << (3 * x + y)) != 0);
            assert_eq!(r.is_isometry(), r.is_isometry_by_criterion(), "mask {mask}");
            assert_eq!(r.is_unitary(), r.is_bijection(), "mask {mask}");
        }
    }

    #[test]
    fn transpose_equals_dagger() {
        let r = Rel::from_pairs(set(2), set(3), [(0, 2), (1, 0), (1, 1)]).unwrap();
        assert_eq!(transpose(&r).unwrap(), r.dagger());
    }

    #[test]
    fn product_index_round_trip() {
        let pi = ProductIndex::new(vec![3, 1, 4, 2]);
        for i in 0..pi.len() {
            assert_eq!(pi.encode(&pi.decode(i)), i);
        }
        assert_eq!(pi.encode(&[2, 0, 3, 1]), 23);
    }

    #[test]
    fn separable_states() {
        assert_eq!(separable_state_count(2, 1), 4);
        assert_eq!(quoted_separable_formula(2, 1), 3);
        assert_eq!(separable_state_count(2, 2), 10);
    }

    #[test]
    fn names_are_validated() {
        assert!(FiniteSet::new(2).with_names(vec!["a".into()]).is_err());
        assert!(FiniteSet::new(2).with_names(vec!["a".into(), "a".into()]).is_err());
        let p = FiniteSet::pair(
            &FiniteSet::new(2).with_names(vec!["a".into(), "b".into()]).unwrap(),
            &FiniteSet::new(1).with_names(vec!["*".into()]).unwrap(),
        );
        assert_eq!(p.names().unwrap(), &["(a,*)".to_string(), "(b,*)".to_string()]);
    }

    #[test]
    fn json_pairs_sorted() {
        let r = Rel::from_pairs(set(2), set(2), [(1, 0), (0, 1), (0, 0)]).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"dom":{"size":2},"cod":{"size":2},"pairs":[[0,0],[0,1],[1,0]]}"#);
        let back: Rel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<Rel>(r#"{"dom":{"size":1},"cod":{"size":1},"pairs":[[0,3]]}"#).is_err());
    }
}
