//! Classical structures on finite sets, presented as abelian groupoids.
//!
//! A classical structure on `X` is a partition of `X` into blocks, each
//! block carrying an abelian group. The four structure maps are
//!
//! ```text
//! mult   = { ((g, g'), g + g') : g, g' in the same block }
//! unit   = { (*, 0_l) : one unit per block }
//! comult = mult^dagger
//! counit = unit^dagger
//! ```
//!
//! Group tables are stored explicitly on carrier indices: two structures
//! with isomorphic groups but different labellings are different.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relcore::{swap, FiniteSet, ProductIndex, Rel};

/// One block of a groupoid: an abelian group on a subset of the carrier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    /// Carrier indices, ascending.
    pub elements: Vec<usize>,
    pub unit: usize,
    /// `table[i][j]` is the carrier index of `elements[i] + elements[j]`.
    pub table: Vec<Vec<usize>>,
}

impl Block {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn position(&self, x: usize) -> Option<usize> {
        self.elements.binary_search(&x).ok()
    }

    /// The group `Z_{f_1} x ... x Z_{f_r}` laid out on `elements` in
    /// mixed-radix order, so the first element is the unit.
    pub fn from_factors(elements: &[usize], factors: &[usize]) -> Result<Block> {
        let index = ProductIndex::new(factors.to_vec());
        if index.len() != elements.len() {
            return Err(Error::InvalidGroupoid {
                block: 0,
                reason: format!(
                    "group of order {} placed on {} elements",
                    index.len(),
                    elements.len()
                ),
            });
        }
        let table = (0..elements.len())
            .map(|i| {
                let a = index.decode(i);
                (0..elements.len())
                    .map(|j| {
                        let b = index.decode(j);
                        let sum: Vec<usize> =
                            a.iter().zip(&b).zip(factors).map(|((x, y), m)| (x + y) % m).collect();
                        elements[index.encode(&sum)]
                    })
                    .collect()
            })
            .collect();
        Block::new(elements.to_vec(), elements[0], table)
    }

    /// The cyclic group on `elements`, the `i`th element standing for `i`.
    pub fn cyclic(elements: &[usize]) -> Result<Block> {
        if elements.is_empty() {
            return Err(Error::InvalidGroupoid { block: 0, reason: "empty block".into() });
        }
        Block::from_factors(elements, &[elements.len()])
    }

    /// Validates the group axioms and sorts elements ascending.
    pub fn new(elements: Vec<usize>, unit: usize, table: Vec<Vec<usize>>) -> Result<Block> {
        let bad = |reason: String| Error::InvalidGroupoid { block: 0, reason };
        let k = elements.len();
        if k == 0 {
            return Err(bad("empty block".into()));
        }
        if table.len() != k || table.iter().any(|row| row.len() != k) {
            return Err(bad(format!("table is not {k} x {k}")));
        }
        let order: Vec<usize> = (0..k).sorted_by_key(|&i| elements[i]).collect();
        let sorted: Vec<usize> = order.iter().map(|&i| elements[i]).collect();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("repeated element".into()));
        }
        let block = Block {
            table: order.iter().map(|&i| order.iter().map(|&j| table[i][j]).collect()).collect(),
            elements: sorted,
            unit,
        };
        block.validate().map_err(bad)?;
        Ok(block)
    }

    #[allow(clippy::needless_range_loop)]
    fn validate(&self) -> std::result::Result<(), String> {
        let k = self.len();
        let pos = |x: usize| self.position(x);
        let mut t = vec![vec![0usize; k]; k];
        for i in 0..k {
            for j in 0..k {
                t[i][j] = pos(self.table[i][j]).ok_or_else(|| {
                    format!(
                        "{} + {} = {} leaves the block",
                        self.elements[i], self.elements[j], self.table[i][j]
                    )
                })?;
            }
        }
        let e = pos(self.unit).ok_or_else(|| format!("unit {} not in block", self.unit))?;
        for i in 0..k {
            if t[e][i] != i || t[i][e] != i {
                return Err(format!("{} is not an identity for {}", self.unit, self.elements[i]));
            }
            if !(0..k).any(|j| t[i][j] == e) {
                return Err(format!("{} has no inverse", self.elements[i]));
            }
            for j in 0..k {
                if t[i][j] != t[j][i] {
                    return Err(format!(
                        "not commutative at ({}, {})",
                        self.elements[i], self.elements[j]
                    ));
                }
                for l in 0..k {
                    if t[t[i][j]][l] != t[i][t[j][l]] {
                        return Err(format!(
                            "not associative at ({}, {}, {})",
                            self.elements[i], self.elements[j], self.elements[l]
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A disjoint family of abelian groups covering a finite set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupoidWire", into = "GroupoidWire")]
pub struct AbelianGroupoid {
    carrier: FiniteSet,
    blocks: Vec<Block>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GroupoidWire {
    carrier: usize,
    blocks: Vec<Block>,
}

impl TryFrom<GroupoidWire> for AbelianGroupoid {
    type Error = Error;
    fn try_from(w: GroupoidWire) -> Result<Self> {
        AbelianGroupoid::new(FiniteSet::new(w.carrier), w.blocks)
    }
}

impl From<AbelianGroupoid> for GroupoidWire {
    fn from(g: AbelianGroupoid) -> Self {
        GroupoidWire { carrier: g.carrier.size(), blocks: g.blocks }
    }
}

impl AbelianGroupoid {
    /// Validates every block and the partition, then orders blocks by their
    /// least element.
    pub fn new(carrier: FiniteSet, blocks: Vec<Block>) -> Result<AbelianGroupoid> {
        let mut checked = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.into_iter().enumerate() {
            let b = Block::new(b.elements, b.unit, b.table).map_err(|e| match e {
                Error::InvalidGroupoid { reason, .. } => Error::InvalidGroupoid { block: i, reason },
                other => other,
            })?;
            checked.push(b);
        }
        checked.sort_by_key(|b| b.elements[0]);
        let n = carrier.size();
        let mut block_of = vec![usize::MAX; n];
        for (i, b) in checked.iter().enumerate() {
            for &x in &b.elements {
                if x >= n {
                    return Err(Error::InvalidGroupoid {
                        block: i,
                        reason: format!("element {x} outside carrier of size {n}"),
                    });
                }
                if block_of[x] != usize::MAX {
                    return Err(Error::InvalidGroupoid {
                        block: i,
                        reason: format!("element {x} lies in two blocks"),
                    });
                }
                block_of[x] = i;
            }
        }
        if let Some(x) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidGroupoid {
                block: checked.len(),
                reason: format!("element {x} is in no block"),
            });
        }
        Ok(AbelianGroupoid { carrier, blocks: checked, block_of })
    }

    /// Every element its own trivial group.
    pub fn discrete(n: usize) -> AbelianGroupoid {
        let blocks = (0..n).map(|x| Block::cyclic(&[x]).expect("singleton")).collect();
        AbelianGroupoid::new(FiniteSet::new(n), blocks).expect("discrete groupoid")
    }

    /// Consecutive cyclic blocks of the given orders, e.g. `[2, 3]` is
    /// `Z2 + Z3` on `{0,1} | {2,3,4}`.
    pub fn cyclic_sum(orders: &[usize]) -> Result<AbelianGroupoid> {
        let mut start = 0;
        let mut blocks = Vec::new();
        for &k in orders {
            let elements: Vec<usize> = (start..start + k).collect();
            blocks.push(Block::cyclic(&elements)?);
            start += k;
        }
        AbelianGroupoid::new(FiniteSet::new(start), blocks)
    }

    /// A single cyclic group on the whole carrier.
    pub fn cyclic(n: usize) -> Result<AbelianGroupoid> {
        AbelianGroupoid::cyclic_sum(&[n])
    }

    pub fn with_carrier(mut self, carrier: FiniteSet) -> Result<AbelianGroupoid> {
        if carrier.size() != self.carrier.size() {
            return Err(Error::CarrierMismatch(format!(
                "groupoid on {} elements relabelled with a set of size {}",
                self.carrier.size(),
                carrier.size()
            )));
        }
        self.carrier = carrier;
        Ok(self)
    }

    pub fn carrier(&self) -> &FiniteSet {
        &self.carrier
    }

    pub fn size(&self) -> usize {
        self.carrier.size()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    /// `a + b` when both lie in one block.
    pub fn add(&self, a: usize, b: usize) -> Option<usize> {
        let l = self.block_of[a];
        if l != self.block_of[b] {
            return None;
        }
        let block = &self.blocks[l];
        Some(block.table[block.position(a)?][block.position(b)?])
    }

    pub fn neg(&self, a: usize) -> usize {
        let block = &self.blocks[self.block_of[a]];
        let i = block.position(a).expect("element of its block");
        let j = (0..block.len()).find(|&j| block.table[i][j] == block.unit).expect("inverse");
        block.elements[j]
    }

    /// `a - b` when both lie in one block.
    pub fn sub(&self, a: usize, b: usize) -> Option<usize> {
        self.add(a, self.neg(b))
    }

    /// The partition underlying the groupoid.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.elements.clone()).collect()
    }

    /// `true` iff the two groupoids live on carriers of the same size.
    fn check_carrier(&self, other: &AbelianGroupoid) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::CarrierMismatch(format!(
                "groupoids on {} and {} elements",
                self.size(),
                other.size()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for AbelianGroupoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let els: Vec<String> = b.elements.iter().map(|&x| self.carrier.element_name(x)).collect();
                format!("{{{}; 0={}}}", els.join(","), self.carrier.element_name(b.unit))
            })
            .collect();
        if parts.is_empty() {
            f.write_str("{}")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// The four structure maps of a classical structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalStructure {
    pub groupoid: AbelianGroupoid,
    pub mult: Rel,
    pub unit: Rel,
    pub comult: Rel,
    pub counit: Rel,
}

impl ClassicalStructure {
    pub fn new(groupoid: AbelianGroupoid) -> ClassicalStructure {
        structure_from_groupoid(&groupoid)
    }

    pub fn discrete(n: usize) -> ClassicalStructure {
        ClassicalStructure::new(AbelianGroupoid::discrete(n))
    }

    pub fn carrier(&self) -> &FiniteSet {
        self.groupoid.carrier()
    }

    /// The spider with `inputs` legs in and `outputs` legs out:
    /// all legs in one block, inputs and outputs summing to the same element.
    pub fn spider(&self, inputs: usize, outputs: usize) -> Rel {
        spider(&self.groupoid, inputs, outputs)
    }

    pub fn classical_points(&self) -> Vec<Rel> {
        classical_points(&self.groupoid)
    }
}

/// Builds the four structure maps from their closed forms.
pub fn structure_from_groupoid(g: &AbelianGroupoid) -> ClassicalStructure {
    let x = g.carrier().clone();
    let n = x.size();
    let mut mult = Rel::empty(x.square(), x.clone());
    let mut unit = Rel::empty(FiniteSet::unit(), x.clone());
    for b in g.blocks() {
        unit.set(0, b.unit);
        for (i, &a) in b.elements.iter().enumerate() {
            for (j, &c) in b.elements.iter().enumerate() {
                mult.set(a * n + c, b.table[i][j]);
            }
        }
    }
    let comult = mult.dagger();
    let counit = unit.dagger();
    ClassicalStructure { groupoid: g.clone(), mult, unit, comult, counit }
}

/// General spider `X^inputs -> X^outputs`.
pub fn spider(g: &AbelianGroupoid, inputs: usize, outputs: usize) -> Rel {
    let x = g.carrier();
    let ins: Vec<&FiniteSet> = vec![x; inputs];
    let outs: Vec<&FiniteSet> = vec![x; outputs];
    let in_index = ProductIndex::of(&ins);
    let out_index = ProductIndex::of(&outs);
    let mut r = Rel::empty(FiniteSet::product(&ins), FiniteSet::product(&outs));
    for b in g.blocks() {
        let sum = |tuple: &[usize]| {
            tuple.iter().fold(b.unit, |acc, &t| g.add(acc, t).expect("same block"))
        };
        let tuples = |k: usize| {
            (0..k).map(|_| b.elements.iter().copied()).multi_cartesian_product()
        };
        let outs_by_sum: Vec<(usize, usize)> = if outputs == 0 {
            vec![(b.unit, 0)]
        } else {
            tuples(outputs).map(|t| (sum(&t), out_index.encode(&t))).collect()
        };
        let ins_by_sum: Vec<(usize, usize)> = if inputs == 0 {
            vec![(b.unit, 0)]
        } else {
            tuples(inputs).map(|t| (sum(&t), in_index.encode(&t))).collect()
        };
        for &(s, i) in &ins_by_sum {
            for &(s2, o) in &outs_by_sum {
                if s == s2 {
                    r.set(i, o);
                }
            }
        }
    }
    r
}

/// Checks the special commutative dagger-Frobenius axioms for
/// `mult = comult^dagger`, `unit = counit^dagger`, by composition.
pub fn frobenius_check(comult: &Rel, counit: &Rel) -> Result<bool> {
    let n = comult.dom().size();
    if comult.cod().size() != n * n || counit.dom().size() != n || counit.cod().size() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "comult {} -> {} and counit {} -> {} do not fit one carrier",
            comult.dom().size(),
            comult.cod().size(),
            counit.dom().size(),
            counit.cod().size()
        )));
    }
    let x = comult.dom().clone();
    let id = Rel::identity(&x);
    let mult = comult.dagger();
    let unit = counit.dagger();
    let assoc = mult.tensor(&id).then(&mult)? == id.tensor(&mult).then(&mult)?;
    let comm = swap(&x, &x).then(&mult)? == mult;
    let left_unit = unit.tensor(&id).then(&mult)? == id;
    let right_unit = id.tensor(&unit).then(&mult)? == id;
    let special = comult.then(&mult)? == id;
    let bubble = mult.then(comult)?;
    let frob_left = comult.tensor(&id).then(&id.tensor(&mult))? == bubble;
    let frob_right = id.tensor(comult).then(&mult.tensor(&id))? == bubble;
    Ok(assoc && comm && left_unit && right_unit && special && frob_left && frob_right)
}

/// Reads a groupoid back off a multiplication and unit.
pub fn recover_groupoid(mult: &Rel, unit: &Rel) -> Result<AbelianGroupoid> {
    let x = unit.cod().clone();
    let n = x.size();
    if mult.dom().size() != n * n || mult.cod().size() != n {
        return Err(Error::ShapeMismatch("multiplication does not match unit".into()));
    }
    let mut blocks = Vec::new();
    for u in unit.image_of(0).collect::<Vec<_>>() {
        let elements: Vec<usize> = (0..n).filter(|&a| mult.contains(u * n + a, a)).collect();
        let table = elements
            .iter()
            .map(|&a| {
                elements
                    .iter()
                    .map(|&c| {
                        let mut img = mult.image_of(a * n + c);
                        match (img.next(), img.next()) {
                            (Some(s), None) => Ok(s),
                            _ => Err(Error::InvalidGroupoid {
                                block: blocks.len(),
                                reason: format!("{a} * {c} is not single-valued"),
                            }),
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        blocks.push(Block { elements, unit: u, table });
    }
    AbelianGroupoid::new(x, blocks)
}

/// Restricted-growth strings for all set partitions of `0..n`.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn go(i: usize, n: usize, rgs: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            let k = rgs.iter().max().map_or(0, |m| m + 1);
            let mut parts = vec![Vec::new(); k];
            for (x, &b) in rgs.iter().enumerate() {
                parts[b].push(x);
            }
            out.push(parts);
            return;
        }
        for b in 0..=max {
            rgs.push(b);
            go(i + 1, n, rgs, if b == max { max + 1 } else { max }, out);
            rgs.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Invariant factors `d_1 | d_2 | ... | d_r` (all `> 1`) with product
/// `order`: one list per isomorphism class of abelian groups.
pub fn abelian_group_classes(order: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, min: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 1 {
            out.push(acc.clone());
            return;
        }
        for d in min.max(2)..=rest {
            if rest.is_multiple_of(d) && acc.last().is_none_or(|&l| d % l == 0) {
                acc.push(d);
                go(rest / d, d, acc, out);
                acc.pop();
            }
        }
    }
    if order == 0 {
        return Vec::new();
    }
    if order == 1 {
        return vec![vec![1]];
    }
    let mut out = Vec::new();
    go(order, 2, &mut Vec::new(), &mut out);
    out
}

/// All labelled abelian group tables on `elements`, sorted and
/// deduplicated by table equality.
pub fn labelled_groups(elements: &[usize]) -> Vec<Block> {
    let k = elements.len();
    let mut seen = BTreeSet::new();
    for factors in abelian_group_classes(k) {
        let abstract_group = Block::from_factors(&(0..k).collect::<Vec<_>>(), &factors)
            .expect("abstract group");
        for perm in (0..k).permutations(k) {
            let label = |i: usize| elements[perm[i]];
            let mut pairs: Vec<(usize, Vec<usize>)> = (0..k)
                .map(|i| (label(i), (0..k).map(|j| label(abstract_group.table[i][j])).collect()))
                .collect();
            pairs.sort();
            let order: Vec<usize> = (0..k).sorted_by_key(|&i| label(i)).collect();
            let table: Vec<Vec<usize>> = pairs
                .into_iter()
                .map(|(_, row)| order.iter().map(|&j| row[j]).collect())
                .collect();
            let mut sorted = elements.to_vec();
            sorted.sort_unstable();
            seen.insert(Block { elements: sorted, unit: label(0), table });
        }
    }
    seen.into_iter().collect()
}

/// Largest carrier accepted by [`enumerate_structures`].
pub const MAX_ENUMERATION_SIZE: usize = 6;

/// Every abelian groupoid on an `n`-set, in canonical order: set
/// partitions in restricted-growth order, then labelled tables per block in
/// sorted order.
pub fn enumerate_structures(n: usize) -> Result<Vec<AbelianGroupoid>> {
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::ResourceGuard(format!(
            "enumeration limited to sets of size <= {MAX_ENUMERATION_SIZE}, got {n}"
        )));
    }
    let mut cache: std::collections::HashMap<Vec<usize>, Vec<Block>> = Default::default();
    let mut out = Vec::new();
    for partition in set_partitions(n) {
        let choices: Vec<Vec<Block>> = partition
            .iter()
            .map(|part| cache.entry(part.clone()).or_insert_with(|| labelled_groups(part)).clone())
            .collect();
        if choices.is_empty() {
            out.push(AbelianGroupoid::new(FiniteSet::new(0), Vec::new())?);
            continue;
        }
        for combo in choices.iter().map(|c| c.iter()).multi_cartesian_product() {
            out.push(AbelianGroupoid::new(FiniteSet::new(n), combo.into_iter().cloned().collect())?);
        }
    }
    Ok(out)
}

/// One state per block: the block's full element set.
pub fn classical_points(g: &AbelianGroupoid) -> Vec<Rel> {
    g.blocks()
        .iter()
        .map(|b| Rel::state(g.carrier(), b.elements.iter().copied()).expect("block elements"))
        .collect()
}

/// All states picking exactly one element from every block.
pub fn phases(g: &AbelianGroupoid) -> Vec<Rel> {
    if g.block_count() == 0 {
        return vec![Rel::empty(FiniteSet::unit(), g.carrier().clone())];
    }
    g.blocks()
        .iter()
        .map(|b| b.elements.iter().copied())
        .multi_cartesian_product()
        .map(|choice| Rel::state(g.carrier(), choice).expect("block elements"))
        .collect()
}

/// Whether the two groupoids arrange the carrier as a grid `G x H`, with
/// the blocks of `a` as rows (each a copy of `G`) and the blocks of `b` as
/// columns (each a copy of `H`), the group operations acting on one
/// coordinate only.
pub fn is_strongly_complementary(a: &AbelianGroupoid, b: &AbelianGroupoid) -> Result<bool> {
    a.check_carrier(b)?;
    if a.size() == 0 {
        return Ok(false);
    }
    let g = a.blocks()[0].len();
    let h = b.blocks()[0].len();
    if a.blocks().iter().any(|blk| blk.len() != g)
        || b.blocks().iter().any(|blk| blk.len() != h)
        || a.block_count() != h
        || b.block_count() != g
    {
        return Ok(false);
    }
    for ra in a.blocks() {
        let cols: BTreeSet<usize> = ra.elements.iter().map(|&x| b.block_of(x)).collect();
        if cols.len() != g {
            return Ok(false);
        }
    }
    Ok(acts_on_labels(a, b) && acts_on_labels(b, a))
}

/// Each block of `rows` induces an operation on the block labels of
/// `cols`; they must all agree.
fn acts_on_labels(rows: &AbelianGroupoid, cols: &AbelianGroupoid) -> bool {
    let induced = |blk: &Block| -> Vec<Vec<usize>> {
        let mut op = vec![vec![0; cols.block_count()]; cols.block_count()];
        for (i, &x) in blk.elements.iter().enumerate() {
            for (j, &y) in blk.elements.iter().enumerate() {
                op[cols.block_of(x)][cols.block_of(y)] = cols.block_of(blk.table[i][j]);
            }
        }
        op
    };
    let first = induced(&rows.blocks()[0]);
    rows.blocks().iter().all(|blk| induced(blk) == first)
}

/// `R_f = union over l of G_l x H_f(l)`, for a partial map `f` from blocks
/// of `a` to blocks of `b`.
pub fn embed_function(f: &[Option<usize>], a: &AbelianGroupoid, b: &AbelianGroupoid) -> Result<Rel> {
    if f.len() != a.block_count() {
        return Err(Error::IndexOutOfRange(format!(
            "map given on {} blocks, source has {}",
            f.len(),
            a.block_count()
        )));
    }
    let mut r = Rel::empty(a.carrier().clone(), b.carrier().clone());
    for (l, target) in f.iter().enumerate() {
        let Some(t) = *target else { continue };
        let tb = b.blocks().get(t).ok_or_else(|| {
            Error::IndexOutOfRange(format!("block {t} of a groupoid with {} blocks", b.block_count()))
        })?;
        for &x in &a.blocks()[l].elements {
            for &y in &tb.elements {
                r.set(x, y);
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    Finer,
    Coarser,
    EqualPartition,
    Incomparable,
}

/// Compares the partitions underlying two groupoids on one carrier.
pub fn refinement_compare(a: &AbelianGroupoid, b: &AbelianGroupoid) -> Result<Refinement> {
    a.check_carrier(b)?;
    let refines = |p: &AbelianGroupoid, q: &AbelianGroupoid| {
        p.blocks().iter().all(|blk| blk.elements.iter().all(|&x| q.block_of(x) == q.block_of(blk.elements[0])))
    };
    Ok(match (refines(a, b), refines(b, a)) {
        (true, true) => Refinement::EqualPartition,
        (true, false) => Refinement::Finer,
        (false, true) => Refinement::Coarser,
        (false, false) => Refinement::Incomparable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_on_two() {
        let s = ClassicalStructure::discrete(2);
        assert_eq!(s.mult.pairs().collect::<Vec<_>>(), vec![(0, 0), (3, 1)]);
        assert_eq!(s.unit.pairs().collect::<Vec<_>>(), vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn z2_adds_mod_two() {
        let s = ClassicalStructure::new(AbelianGroupoid::cyclic(2).unwrap());
        for a in 0..2 {
            for b in 0..2 {
                let img: Vec<usize> = s.mult.image_of(a * 2 + b).collect();
                assert_eq!(img, vec![(a + b) % 2]);
            }
        }
        assert!(frobenius_check(&s.comult, &s.counit).unwrap());
    }

    #[test]
    fn empty_comult_fails_frobenius() {
        let x = FiniteSet::new(2);
        let comult = Rel::empty(x.clone(), x.square());
        let counit = Rel::full(x, FiniteSet::unit());
        assert!(!frobenius_check(&comult, &counit).unwrap());
        assert!(frobenius_check(&comult, &Rel::empty(FiniteSet::new(3), FiniteSet::unit())).is_err());
    }

    #[test]
    fn invalid_tables_are_reported() {
        // 0 + 1 = 0 breaks the identity law for unit 0.
        let err = Block::new(vec![0, 1], 0, vec![vec![0, 0], vec![0, 1]]).unwrap_err();
        assert!(matches!(err, Error::InvalidGroupoid { .. }), "{err}");
        let blocks = vec![Block::cyclic(&[0, 1]).unwrap(), Block::cyclic(&[1, 2]).unwrap()];
        let err = AbelianGroupoid::new(FiniteSet::new(3), blocks).unwrap_err();
        assert!(err.to_string().contains("two blocks"), "{err}");
        let err = AbelianGroupoid::new(FiniteSet::new(3), vec![Block::cyclic(&[0, 1]).unwrap()]).unwrap_err();
        assert!(err.to_string().contains("no block"), "{err}");
    }

    #[test]
    fn canonical_block_order() {
        let g = AbelianGroupoid::new(
            FiniteSet::new(3),
            vec![Block::cyclic(&[2, 1]).unwrap(), Block::cyclic(&[0]).unwrap()],
        )
        .unwrap();
        assert_eq!(g.partition(), vec![vec![0], vec![1, 2]]);
        assert_eq!(g.blocks()[1].unit, 2);
    }

    #[test]
    fn enumeration_counts() {
        let counts: Vec<usize> = (0..=4).map(|n| enumerate_structures(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 10, 53]);
        assert!(matches!(enumerate_structures(7), Err(Error::ResourceGuard(_))));
    }

    #[test]
    fn group_classes() {
        assert_eq!(abelian_group_classes(1), vec![vec![1]]);
        assert_eq!(abelian_group_classes(4), vec![vec![2, 2], vec![4]]);
        assert_eq!(abelian_group_classes(8), vec![vec![2, 2, 2], vec![2, 4], vec![8]]);
        assert_eq!(abelian_group_classes(6), vec![vec![6]]);
    }

    #[test]
    fn points_and_phases_of_z2_z3() {
        let g = AbelianGroupoid::cyclic_sum(&[2, 3]).unwrap();
        let pts: Vec<Vec<usize>> = classical_points(&g).iter().map(|p| p.range().into_iter().collect()).collect();
        assert_eq!(pts, vec![vec![0, 1], vec![2, 3, 4]]);
        assert_eq!(phases(&g).len(), 6);
        assert_eq!(phases(&AbelianGroupoid::discrete(4)).len(), 1);
        assert_eq!(phases(&AbelianGroupoid::discrete(4))[0].len(), 4);
    }

    #[test]
    fn phases_act_unitarily() {
        let g = AbelianGroupoid::cyclic_sum(&[2, 3]).unwrap();
        let s = ClassicalStructure::new(g.clone());
        let id = Rel::identity(g.carrier());
        for phi in phases(&g) {
            let act = phi.tensor(&id).retyped(g.carrier().clone(), g.carrier().square()).unwrap();
            assert!(act.then(&s.mult).unwrap().is_unitary());
        }
    }

    #[test]
    fn strong_complementarity_examples() {
        let rows = AbelianGroupoid::cyclic_sum(&[2, 2]).unwrap();
        let cols = AbelianGroupoid::new(
            FiniteSet::new(4),
            vec![Block::cyclic(&[0, 2]).unwrap(), Block::cyclic(&[1, 3]).unwrap()],
        )
        .unwrap();
        assert!(is_strongly_complementary(&rows, &cols).unwrap());
        assert!(!is_strongly_complementary(&rows, &rows).unwrap());
        let d = AbelianGroupoid::discrete(2);
        assert!(!is_strongly_complementary(&d, &d).unwrap());
        let z2 = AbelianGroupoid::cyclic(2).unwrap();
        assert!(is_strongly_complementary(&z2, &d).unwrap());
        assert!(is_strongly_complementary(&rows, &AbelianGroupoid::discrete(3)).is_err());
    }

    #[test]
    fn misaligned_grid_is_rejected() {
        // Rows Z4 on {0,1,2,3} and {4,5,6,7}; columns pair 0-4, 1-5, 2-6, 3-7
        // except the second row is labelled so its addition disagrees.
        let row1 = Block::cyclic(&[0, 1, 2, 3]).unwrap();
        let row2 = Block::from_factors(&[4, 5, 6, 7], &[2, 2]).unwrap();
        let a = AbelianGroupoid::new(FiniteSet::new(8), vec![row1, row2]).unwrap();
        let b = AbelianGroupoid::new(
            FiniteSet::new(8),
            (0..4).map(|i| Block::cyclic(&[i, i + 4]).unwrap()).collect(),
        )
        .unwrap();
        assert!(!is_strongly_complementary(&a, &b).unwrap());
    }

    #[test]
    fn embedding_examples() {
        let d = AbelianGroupoid::discrete(2);
        let z2 = AbelianGroupoid::cyclic(2).unwrap();
        assert_eq!(embed_function(&[Some(0), Some(1)], &d, &d).unwrap(), Rel::identity(d.carrier()));
        assert!(embed_function(&[None, None], &d, &d).unwrap().is_empty());
        assert_eq!(embed_function(&[Some(0), Some(0)], &d, &z2).unwrap().len(), 4);
        assert!(embed_function(&[Some(1), Some(0)], &d, &z2).is_err());
        assert!(embed_function(&[Some(0)], &d, &z2).is_err());
    }

    #[test]
    fn refinement_examples() {
        let d = AbelianGroupoid::discrete(3);
        let a = AbelianGroupoid::new(
            FiniteSet::new(3),
            vec![Block::cyclic(&[0, 1]).unwrap(), Block::cyclic(&[2]).unwrap()],
        )
        .unwrap();
        let b = AbelianGroupoid::new(
            FiniteSet::new(3),
            vec![Block::cyclic(&[0]).unwrap(), Block::cyclic(&[1, 2]).unwrap()],
        )
        .unwrap();
        assert_eq!(refinement_compare(&d, &a).unwrap(), Refinement::Finer);
        assert_eq!(refinement_compare(&a, &d).unwrap(), Refinement::Coarser);
        assert_eq!(refinement_compare(&a, &b).unwrap(), Refinement::Incomparable);
        let enumerated = enumerate_structures(2).unwrap();
        let z2s: Vec<_> = enumerated.iter().filter(|g| g.block_count() == 1).collect();
        assert_eq!(refinement_compare(z2s[0], z2s[1]).unwrap(), Refinement::EqualPartition);
        assert_ne!(z2s[0], z2s[1]);
    }

    #[test]
    fn spider_two_one_is_mult() {
        let s = ClassicalStructure::new(AbelianGroupoid::cyclic_sum(&[2, 1]).unwrap());
        assert_eq!(s.spider(2, 1), s.mult);
        assert_eq!(s.spider(1, 2), s.comult);
        assert_eq!(s.spider(0, 1), s.unit);
        assert_eq!(s.spider(1, 1), Rel::identity(s.carrier()));
    }

    #[test]
    fn recovery_round_trip() {
        for g in enumerate_structures(3).unwrap() {
            let s = ClassicalStructure::new(g.clone());
            assert_eq!(recover_groupoid(&s.mult, &s.unit).unwrap(), g);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = AbelianGroupoid::cyclic_sum(&[2, 1]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(
            s,
            r#"{"carrier":3,"blocks":[{"elements":[0,1],"unit":0,"table":[[0,1],[1,0]]},{"elements":[2],"unit":2,"table":[[2]]}]}"#
        );
        assert_eq!(serde_json::from_str::<AbelianGroupoid>(&s).unwrap(), g);
        assert!(serde_json::from_str::<AbelianGroupoid>(r#"{"carrier":2,"blocks":[]}"#).is_err());
    }
}
