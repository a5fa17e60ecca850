//! Test harnesses: invocation sequences partially ordered by happens-before.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use parse::{parse_outcome, SyntaxError};

use crate::order::{Order, OrderError};
use crate::outcome::Outcome;
use crate::spec::{SequentialSpec, SpecError};
use crate::value::{Invocation, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("a harness needs at least one sequence")]
    NoSequences,
    #[error("sequence {0} is empty")]
    EmptySequence(usize),
    #[error("happens-before: {0}")]
    Order(#[from] OrderError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("outcome has {got} slots, harness has {expected} invocations")]
    OutcomeLength { expected: usize, got: usize },
    #[error("history order does not contain {0} < {1} required by the harness")]
    InconsistentHistory(usize, usize),
}

/// A list of invocation sequences with a strict partial order between them.
///
/// The happens-before relation is kept as its transitive reduction, so two
/// harnesses that denote the same order compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Harness {
    sequences: Vec<Vec<Invocation>>,
    hb: Vec<(usize, usize)>,
    order: Order,
}

impl Harness {
    pub fn new(
        sequences: Vec<Vec<Invocation>>,
        hb: &[(usize, usize)],
    ) -> Result<Self, HarnessError> {
        if sequences.is_empty() {
            return Err(HarnessError::NoSequences);
        }
        if let Some(i) = sequences.iter().position(Vec::is_empty) {
            return Err(HarnessError::EmptySequence(i));
        }
        let order = Order::from_pairs(sequences.len(), hb)?;
        Ok(Harness {
            hb: order.reduction(),
            sequences,
            order,
        })
    }

    /// Parses and checks every invocation against `spec`.
    pub fn parse_for(text: &str, spec: &SequentialSpec) -> Result<Self, HarnessError> {
        let h = parse_harness(text)?;
        h.validate(spec)?;
        Ok(h)
    }

    pub fn validate(&self, spec: &SequentialSpec) -> Result<(), HarnessError> {
        for inv in self.sequences.iter().flatten() {
            spec.validate(inv)?;
        }
        Ok(())
    }

    pub fn sequences(&self) -> &[Vec<Invocation>] {
        &self.sequences
    }

    /// Happens-before as covering pairs `(i, j)`: sequence `i` precedes `j`.
    pub fn hb(&self) -> &[(usize, usize)] {
        &self.hb
    }

    /// Transitively closed happens-before over sequence indices.
    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn num_sequences(&self) -> usize {
        self.sequences.len()
    }

    pub fn num_invocations(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }

    /// Invocations in listing order, which is also invocation-index order.
    pub fn invocations(&self) -> impl Iterator<Item = &Invocation> {
        self.sequences.iter().flatten()
    }

    pub fn invoc_index(&self) -> InvocIndex {
        let mut offsets = Vec::with_capacity(self.sequences.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for s in &self.sequences {
            acc += s.len();
            offsets.push(acc);
        }
        InvocIndex { offsets }
    }

    /// Per-invocation order: program order within each sequence plus
    /// sequence-level happens-before lifted to every invocation pair.
    pub fn invocation_order(&self) -> Order {
        let idx = self.invoc_index();
        let mut pairs = Vec::new();
        for (s, seq) in self.sequences.iter().enumerate() {
            for p in 1..seq.len() {
                pairs.push((idx.slot(s, p - 1), idx.slot(s, p)));
            }
        }
        for &(i, j) in &self.hb {
            pairs.push((idx.slot(i, self.sequences[i].len() - 1), idx.slot(j, 0)));
        }
        Order::from_pairs(self.num_invocations(), &pairs).expect("harness order is acyclic")
    }

    pub fn stats(&self) -> HarnessStats {
        let mut methods = BTreeSet::new();
        let mut values = BTreeSet::new();
        let mut per_method_invocations: BTreeMap<String, Vec<Invocation>> = BTreeMap::new();
        for inv in self.invocations() {
            methods.insert(inv.method.clone());
            for a in &inv.args {
                a.for_each_atom(&mut |v| {
                    values.insert(v.clone());
                });
            }
            per_method_invocations
                .entry(inv.method.clone())
                .or_default()
                .push(inv.clone());
        }
        for invs in per_method_invocations.values_mut() {
            invs.sort();
        }
        HarnessStats {
            methods,
            values,
            num_sequences: self.num_sequences(),
            num_invocations: self.num_invocations(),
            per_method_invocations,
        }
    }

    /// Whether `self ⪯ other`: each sequence of `self` is a prefix of a
    /// distinct sequence of `other`, and every matched sequence of `other`
    /// happens before every unmatched one.
    pub fn is_prefix_of(&self, other: &Harness) -> bool {
        let n1 = self.num_sequences();
        let n2 = other.num_sequences();
        if n1 > n2 {
            return false;
        }
        let candidates: Vec<Vec<usize>> = self
            .sequences
            .iter()
            .map(|s| {
                (0..n2)
                    .filter(|&j| other.sequences[j].starts_with(s))
                    .collect()
            })
            .collect();
        let mut image = vec![false; n2];
        fn search(i: usize, cands: &[Vec<usize>], image: &mut [bool], other: &Harness) -> bool {
            if i == cands.len() {
                let ord = other.order();
                return (0..image.len()).filter(|&a| image[a]).all(|a| {
                    (0..image.len())
                        .filter(|&b| !image[b])
                        .all(|b| ord.lt(a, b))
                });
            }
            for &j in &cands[i] {
                if !image[j] {
                    image[j] = true;
                    if search(i + 1, cands, image, other) {
                        return true;
                    }
                    image[j] = false;
                }
            }
            false
        }
        search(0, &candidates, &mut image, other)
    }

    /// Reorders sequences by `perm` (new position of old sequence `i` is
    /// `perm[i]`) and renames happens-before accordingly.
    pub fn permute(&self, perm: &[usize]) -> Harness {
        let mut seqs = vec![Vec::new(); self.num_sequences()];
        for (i, s) in self.sequences.iter().enumerate() {
            seqs[perm[i]] = s.clone();
        }
        let order = self.order.relabel(perm);
        Harness {
            sequences: seqs,
            hb: order.reduction(),
            order,
        }
    }

    fn sort_key(&self) -> (Vec<Vec<String>>, Vec<(usize, usize)>) {
        let seqs = self
            .sequences
            .iter()
            .map(|s| s.iter().map(ToString::to_string).collect())
            .collect();
        (seqs, self.hb.clone())
    }

    /// The representative of this harness's symmetry class: the sequence
    /// permutation minimizing (sequences compared invocation by invocation
    /// on their text, then sorted hb reduction pairs).
    pub fn canonicalize(&self) -> Harness {
        (0..self.num_sequences())
            .permutations(self.num_sequences())
            .map(|perm| self.permute(&perm))
            .min_by(|a, b| a.sort_key().cmp(&b.sort_key()))
            .expect("at least one permutation")
    }

    pub fn is_symmetric_to(&self, other: &Harness) -> bool {
        self.num_sequences() == other.num_sequences() && self.canonicalize() == other.canonicalize()
    }
}

/// Parses harness text such as `[put(0,0)], [clear(); put(1,1)], {0 < 1}`.
pub fn parse_harness(text: &str) -> Result<Harness, HarnessError> {
    let raw = parse::Parser::new(text).harness()?;
    Harness::new(raw.sequences, &raw.hb)
}

fn format_sequence(seq: &[Invocation]) -> String {
    let mut s = String::from("[");
    for (i, inv) in seq.iter().enumerate() {
        if i > 0 {
            s.push_str("; ");
        }
        s.push_str(&inv.to_string());
    }
    s.push(']');
    s
}

impl fmt::Display for Harness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sequences.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_sequence(s))?;
        }
        if !self.hb.is_empty() {
            f.write_str(", {")?;
            for (k, (i, j)) in self.hb.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{i} < {j}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

impl FromStr for Harness {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_harness(s)
    }
}

impl Serialize for Harness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Harness {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_harness(&text).map_err(serde::de::Error::custom)
    }
}

/// Maps invocation occurrences to indices in listing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvocIndex {
    offsets: Vec<usize>,
}

impl InvocIndex {
    pub fn slot(&self, seq: usize, pos: usize) -> usize {
        debug_assert!(self.offsets[seq] + pos < self.offsets[seq + 1]);
        self.offsets[seq] + pos
    }

    /// Inverse of [`slot`](Self::slot).
    pub fn locate(&self, slot: usize) -> (usize, usize) {
        let seq = self.offsets.partition_point(|&o| o <= slot) - 1;
        (seq, slot - self.offsets[seq])
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Slot range of sequence `seq`.
    pub fn range(&self, seq: usize) -> std::ops::Range<usize> {
        self.offsets[seq]..self.offsets[seq + 1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarnessStats {
    pub methods: BTreeSet<String>,
    pub values: BTreeSet<Value>,
    pub num_sequences: usize,
    pub num_invocations: usize,
    /// Sorted multiset of invocations per method.
    pub per_method_invocations: BTreeMap<String, Vec<Invocation>>,
}

impl HarnessStats {
    pub fn invocations_of(&self, method: &str) -> &[Invocation] {
        self.per_method_invocations
            .get(method)
            .map_or(&[], Vec::as_slice)
    }

    pub fn count_of(&self, method: &str) -> usize {
        self.invocations_of(method).len()
    }
}

/// A harness together with one observed outcome and the happens-before
/// order between invocations in the execution that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    pub harness: Harness,
    pub outcome: Outcome,
    hb: Order,
}

impl History {
    /// `hb` ranges over invocation indices and must contain the order the
    /// harness itself imposes.
    pub fn new(
        harness: Harness,
        outcome: Outcome,
        hb: &[(usize, usize)],
    ) -> Result<Self, HarnessError> {
        let n = harness.num_invocations();
        if outcome.len() != n {
            return Err(HarnessError::OutcomeLength {
                expected: n,
                got: outcome.len(),
            });
        }
        let hb = Order::from_pairs(n, hb)?;
        let required = harness.invocation_order();
        if let Some((a, b)) = required.pairs().into_iter().find(|&(a, b)| !hb.lt(a, b)) {
            return Err(HarnessError::InconsistentHistory(a, b));
        }
        Ok(History {
            harness,
            outcome,
            hb,
        })
    }

    pub fn hb(&self) -> &Order {
        &self.hb
    }

    /// A harness with every invocation in its own sequence, ordered by this
    /// history's happens-before.
    pub fn singletonize(&self) -> Harness {
        let seqs = self
            .harness
            .invocations()
            .map(|inv| vec![inv.clone()])
            .collect();
        Harness::new(seqs, &self.hb.reduction()).expect("history order is a strict partial order")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Family;

    pub(crate) const H1: &str = "[put(0,0)], [clear(); put(1,1); containsKey(1)]";
    pub(crate) const H2: &str = "[put(0,0); put(2,0)], [clear(); put(1,1)]";
    pub(crate) const H3: &str = "[put(0,0); put(2,0)], [clear(); put(1,1); containsKey(1); get(2)]";
    pub(crate) const H4: &str = "[put(0,0); put(2,0)], [clear(); put(1,1); containsKey(1); get(2)], [put(3,1)], {0 < 2, 1 < 2}";

    fn h(s: &str) -> Harness {
        parse_harness(s).unwrap()
    }

    #[test]
    fn parses_example_harnesses() {
        let h1 = h(H1);
        assert_eq!(h1.num_sequences(), 2);
        assert_eq!(h1.sequences()[0].len(), 1);
        assert_eq!(h1.sequences()[1].len(), 3);
        assert!(h1.hb().is_empty());
        let h4 = h(H4);
        assert_eq!(h4.num_sequences(), 3);
        assert_eq!(h4.order().pairs(), vec![(0, 2), (1, 2)]);
        assert!(h4.to_string().contains("{0 < 2, 1 < 2}"));
    }

    #[test]
    fn rejects_bad_orders_and_arity() {
        assert!(matches!(
            parse_harness("[put(3,1)], {0 < 0}"),
            Err(HarnessError::Order(OrderError::Cycle { .. }))
        ));
        assert!(matches!(
            parse_harness("[a()], [b()], {0 < 1, 1 < 0}"),
            Err(HarnessError::Order(_))
        ));
        assert!(matches!(
            parse_harness("[a()], {0 < 3}"),
            Err(HarnessError::Order(OrderError::OutOfRange { .. }))
        ));
        let spec = SequentialSpec::new(Family::OrderedMap);
        assert!(matches!(
            Harness::parse_for("[put(0)]", &spec),
            Err(HarnessError::Spec(SpecError::Arity { .. }))
        ));
        assert!(matches!(
            Harness::parse_for("[take()]", &spec),
            Err(HarnessError::Spec(_))
        ));
        assert!(matches!(parse_harness("[]"), Err(HarnessError::Syntax(_))));
    }

    #[test]
    fn format_round_trip() {
        for s in [
            H1,
            H2,
            H3,
            H4,
            "[get(0)]",
            "[putAll({0=1,1=0})], [get(0); remove(1)]",
            "[removeAll({1,1})]",
        ] {
            let parsed = h(s);
            assert_eq!(parsed.to_string(), s);
            assert_eq!(h(&parsed.to_string()), parsed);
        }
        assert_eq!(h("[get(0)]").to_string(), "[get(0)]");
        // redundant constraints normalize away
        assert_eq!(
            h("[a()], [b()], [c()], {0<1, 1<2, 0<2}").to_string(),
            "[a()], [b()], [c()], {0 < 1, 1 < 2}"
        );
    }

    #[test]
    fn stats_of_harness_four() {
        let s = h(H4).stats();
        let names: Vec<_> = s.methods.iter().map(String::as_str).collect();
        assert_eq!(names, vec!["clear", "containsKey", "get", "put"]);
        assert_eq!(s.values, (0..4).map(Value::Int).collect());
        assert_eq!(s.num_sequences, 3);
        assert_eq!(s.num_invocations, 7);
        let puts: Vec<_> = s
            .invocations_of("put")
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(puts, vec!["put(0,0)", "put(1,1)", "put(2,0)", "put(3,1)"]);
        let g = h("[get(0)]").stats();
        assert_eq!((g.num_invocations, g.num_sequences), (1, 1));
    }

    #[test]
    fn invoc_index_is_listing_order() {
        let h1 = h(H1);
        let idx = h1.invoc_index();
        let listed: Vec<_> = h1.invocations().map(ToString::to_string).collect();
        assert_eq!(
            listed,
            vec!["put(0,0)", "clear()", "put(1,1)", "containsKey(1)"]
        );
        assert_eq!(idx.slot(0, 0), 0);
        assert_eq!(idx.slot(1, 0), 1);
        assert_eq!(idx.locate(3), (1, 2));
        let ab = h("[a()], [b()]").invoc_index();
        assert_eq!((ab.slot(0, 0), ab.slot(1, 0)), (0, 1));
    }

    #[test]
    fn prefix_relation_examples() {
        let (h1, h2, h3, h4) = (h(H1), h(H2), h(H3), h(H4));
        assert!(h1.is_prefix_of(&h3));
        assert!(h1.is_prefix_of(&h4));
        assert!(!h1.is_prefix_of(&h2));
        for x in [&h1, &h2, &h3, &h4] {
            assert!(x.is_prefix_of(x));
        }
        // unmatched sequences must come after matched ones
        assert!(!h(H1).is_prefix_of(&h(
            "[put(0,0)], [clear(); put(1,1); containsKey(1)], [get(0)]"
        )));
    }

    #[test]
    fn symmetric_variant_shares_canonical_form() {
        let v = h("[put(3,1)], [put(0,0); put(2,0)], [clear(); put(1,1); containsKey(1); get(2)], {1 < 0, 2 < 0}");
        assert!(v.is_symmetric_to(&h(H4)));
        assert_eq!(h("[get(0)]").canonicalize(), h("[get(0)]"));
    }

    #[test]
    fn singletonize_total_history() {
        let h1 = h(H1);
        let out = Outcome(vec![
            Value::Null,
            Value::Unit,
            Value::Null,
            Value::Bool(true),
        ]);
        let hist = History::new(h1.clone(), out.clone(), &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let s = hist.singletonize();
        assert_eq!(s.num_sequences(), 4);
        assert!(s.order().is_total());
        // program order only
        let hist = History::new(h1.clone(), out, &[(1, 2), (2, 3)]).unwrap();
        let s = hist.singletonize();
        assert_eq!(s.order().pairs(), vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(
            s.stats().per_method_invocations,
            h1.stats().per_method_invocations
        );
    }

    #[test]
    fn history_must_contain_harness_order() {
        let h1 = h(H1);
        let out = Outcome(vec![
            Value::Null,
            Value::Unit,
            Value::Null,
            Value::Bool(true),
        ]);
        assert!(matches!(
            History::new(h1.clone(), out.clone(), &[(1, 2)]),
            Err(HarnessError::InconsistentHistory(..))
        ));
        assert!(matches!(
            History::new(h1, Outcome(vec![]), &[]),
            Err(HarnessError::OutcomeLength { .. })
        ));
    }
}
