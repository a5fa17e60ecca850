//! Harness enumeration for a method under test: all harnesses over the core
//! methods plus exactly one invocation of the tested method, for a given
//! number of invocations, argument values and sequences.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::Harness;
use crate::order::{all_strict_orders, layered_orders, Order};
use crate::spec::{ArgKind, Mutability, SequentialSpec, SpecError};
use crate::value::{Invocation, Value};

/// Bounds of one enumeration round: (invocations, values, sequences).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EnumParams {
    pub invocations: usize,
    pub values: usize,
    pub sequences: usize,
}

impl EnumParams {
    pub const fn new(invocations: usize, values: usize, sequences: usize) -> Self {
        EnumParams {
            invocations,
            values,
            sequences,
        }
    }

    /// Component-wise `self <= other`.
    pub fn le(&self, other: &EnumParams) -> bool {
        self.invocations <= other.invocations
            && self.values <= other.values
            && self.sequences <= other.sequences
    }

    pub fn is_valid(&self) -> bool {
        self.invocations >= 1
            && self.values >= 1
            && self.sequences >= 1
            && self.invocations >= self.sequences
    }
}

impl fmt::Display for EnumParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})",
            self.invocations, self.values, self.sequences
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// `(1,1,1), (2,2,2), ...`, clipped to the bounds.
    Diagonal,
    /// Every triple, by increasing component sum.
    Graded,
}

/// Generator of enumeration parameters. Every schedule is complete: any
/// triple within the bounds is eventually dominated component-wise.
#[derive(Debug, Clone)]
pub struct ParamSchedule {
    kind: ScheduleKind,
    bounds: Option<EnumParams>,
    step: usize,
    pending: Vec<EnumParams>,
    last: Option<EnumParams>,
}

impl ParamSchedule {
    pub fn diagonal(bounds: Option<EnumParams>) -> Self {
        Self::new(ScheduleKind::Diagonal, bounds)
    }

    pub fn graded(bounds: Option<EnumParams>) -> Self {
        Self::new(ScheduleKind::Graded, bounds)
    }

    pub fn new(kind: ScheduleKind, bounds: Option<EnumParams>) -> Self {
        ParamSchedule {
            kind,
            bounds,
            step: 0,
            pending: Vec::new(),
            last: None,
        }
    }

    /// The next parameters, or `None` once the bounds are exhausted.
    pub fn next_params(&mut self) -> Option<EnumParams> {
        match self.kind {
            ScheduleKind::Diagonal => loop {
                self.step += 1;
                let k = self.step;
                let p = match self.bounds {
                    None => EnumParams::new(k, k, k),
                    Some(b) => {
                        if k > b.invocations.max(b.values).max(b.sequences) {
                            return None;
                        }
                        let i = k.min(b.invocations);
                        EnumParams::new(i, k.min(b.values), k.min(b.sequences).min(i))
                    }
                };
                if Some(p) != self.last {
                    self.last = Some(p);
                    return Some(p);
                }
            },
            ScheduleKind::Graded => loop {
                if let Some(p) = self.pending.pop() {
                    return Some(p);
                }
                self.step += 1;
                let total = self.step + 2;
                if let Some(b) = self.bounds {
                    if total > b.invocations + b.values + b.sequences {
                        return None;
                    }
                }
                let mut level: Vec<EnumParams> = (1..total)
                    .flat_map(|i| (1..total).map(move |v| (i, v)))
                    .filter(|&(i, v)| i + v < total)
                    .map(|(i, v)| EnumParams::new(i, v, total - i - v))
                    .filter(|p| p.is_valid() && self.bounds.is_none_or(|b| p.le(&b)))
                    .collect();
                level.sort_by(|a, b| b.cmp(a));
                self.pending = level;
            },
        }
    }
}

impl Iterator for ParamSchedule {
    type Item = EnumParams;

    fn next(&mut self) -> Option<EnumParams> {
        self.next_params()
    }
}

/// Switches for the optional reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumOptions {
    pub symmetry: bool,
    pub filter_read_only: bool,
    pub filter_serialized: bool,
    /// Up to this many sequences every strict partial order is enumerated;
    /// beyond it only three-layer (initial / parallel / final) orders.
    pub full_order_limit: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            symmetry: true,
            filter_read_only: true,
            filter_serialized: true,
            full_order_limit: 3,
        }
    }
}

impl EnumOptions {
    pub fn unreduced() -> Self {
        EnumOptions {
            symmetry: false,
            filter_read_only: false,
            filter_serialized: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("method under test `{0}` must not be a core method")]
    TestedMethodInCore(String),
    #[error("invalid parameters {0}: need invocations >= sequences >= 1 and values >= 1")]
    BadParams(EnumParams),
    #[error("{0} distinct values exceed the supported maximum of 32")]
    TooManyValues(usize),
}

/// Whether every invocation of `h` is read-only (such harnesses are skipped).
pub fn filter_all_read_only(h: &Harness, spec: &SequentialSpec) -> Result<bool, SpecError> {
    for inv in h.invocations() {
        if spec.method(&inv.method)?.mutability == Mutability::Update {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For a read-only method under test: whether no update invocation can run
/// in parallel with it (such harnesses are skipped). Never fires for an
/// update method under test.
pub fn filter_serialized_read_only_mut(
    h: &Harness,
    m: &str,
    spec: &SequentialSpec,
) -> Result<bool, SpecError> {
    if spec.method(m)?.mutability == Mutability::Update {
        return Ok(false);
    }
    let order = h.order();
    let m_seqs: Vec<usize> = (0..h.num_sequences())
        .filter(|&s| h.sequences()[s].iter().any(|inv| inv.method == m))
        .collect();
    for &ms in &m_seqs {
        for (t, seq) in h.sequences().iter().enumerate() {
            if !order.unordered(ms, t) {
                continue;
            }
            for inv in seq {
                if spec.method(&inv.method)?.mutability == Mutability::Update {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Deterministic Fisher–Yates shuffle driven by ChaCha8 seeded from `seed`;
/// the index at step `i` is `next_u64() % (i + 1)`.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// One candidate invocation, with precomputed metadata.
#[derive(Debug, Clone)]
struct Choice {
    inv: Invocation,
    values: u32,
    update: bool,
}

/// Compact encoding of an enumerated harness: order index, sequence lengths
/// and choice ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HarnessCode(Box<[u16]>);

impl HarnessCode {
    fn order(&self) -> usize {
        self.0[0] as usize
    }

    fn num_sequences(&self) -> usize {
        self.0[1] as usize
    }

    fn lens(&self) -> &[u16] {
        &self.0[2..2 + self.num_sequences()]
    }

    fn ids(&self) -> &[u16] {
        &self.0[2 + self.num_sequences()..]
    }
}

/// The harnesses of one enumeration round, generated as compact codes and
/// decoded on demand.
pub struct HarnessSpace {
    params: EnumParams,
    options: EnumOptions,
    /// Sorted by formatted text, so comparing ids compares text.
    choices: Vec<Choice>,
    tested: Vec<u16>,
    others: Vec<u16>,
    tested_read_only: bool,
    orders: Vec<Order>,
    reductions: Vec<Vec<(usize, usize)>>,
    /// `relabeled[o][p]`: index of order `o` relabeled by permutation `p`.
    relabeled: Vec<Vec<usize>>,
    perms: Vec<Vec<usize>>,
}

fn arg_domain(kind: ArgKind, vals: usize) -> Vec<Value> {
    let v = vals as i64;
    match kind {
        ArgKind::ScalarValue | ArgKind::KeyScalar | ArgKind::ValueScalar => {
            (0..v).map(Value::Int).collect()
        }
        ArgKind::ValueCollection => (0..v)
            .flat_map(|a| (a..v).map(move |b| Value::List(vec![Value::Int(a), Value::Int(b)])))
            .collect(),
        ArgKind::KeyValueCollection => {
            let mut out = Vec::new();
            for k1 in 0..v {
                for k2 in k1 + 1..v {
                    for v1 in 0..v {
                        for v2 in 0..v {
                            out.push(Value::Map(vec![
                                (k1.into(), v1.into()),
                                (k2.into(), v2.into()),
                            ]));
                        }
                    }
                }
            }
            out
        }
    }
}

/// All invocations of `name` whose arguments range over `[0, vals-1]`.
pub fn method_invocations(
    spec: &SequentialSpec,
    name: &str,
    vals: usize,
) -> Result<Vec<Invocation>, SpecError> {
    let m = spec.method(name)?;
    let mut out = vec![Vec::new()];
    for &kind in &m.arg_kinds {
        let dom = arg_domain(kind, vals);
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Value>| {
                dom.iter().map(move |d| {
                    let mut p = prefix.clone();
                    p.push(d.clone());
                    p
                })
            })
            .collect();
    }
    Ok(out
        .into_iter()
        .map(|args| Invocation::new(name, args))
        .collect())
}

fn value_mask(inv: &Invocation) -> u32 {
    let mut mask = 0u32;
    for a in &inv.args {
        a.for_each_atom(&mut |v| {
            if let Value::Int(i) = v {
                if (0..32).contains(i) {
                    mask |= 1 << i;
                }
            }
        });
    }
    mask
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..n).permutations(n).collect()
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl HarnessSpace {
    pub fn new(
        spec: &SequentialSpec,
        core: &[&str],
        tested: &str,
        params: EnumParams,
        options: EnumOptions,
    ) -> Result<Self, EnumError> {
        if !params.is_valid() {
            return Err(EnumError::BadParams(params));
        }
        if params.values > 32 {
            return Err(EnumError::TooManyValues(params.values));
        }
        if core.contains(&tested) {
            return Err(EnumError::TestedMethodInCore(tested.to_string()));
        }
        let tested_spec = spec.method(tested)?;
        let mut choices = Vec::new();
        for &name in core.iter().chain(std::iter::once(&tested)) {
            let update = spec.method(name)?.mutability == Mutability::Update;
            for inv in method_invocations(spec, name, params.values)? {
                choices.push(Choice {
                    values: value_mask(&inv),
                    inv,
                    update,
                });
            }
        }
        choices.sort_by_cached_key(|c| c.inv.to_string());
        choices.dedup_by(|a, b| a.inv == b.inv);
        let tested_ids = (0..choices.len() as u16)
            .filter(|&i| choices[i as usize].inv.method == tested)
            .collect();
        let others = (0..choices.len() as u16)
            .filter(|&i| choices[i as usize].inv.method != tested)
            .collect();

        let s = params.sequences;
        let orders = if s <= options.full_order_limit {
            all_strict_orders(s)
        } else {
            layered_orders(s)
        };
        let perms = permutations(s);
        let relabeled = orders
            .iter()
            .map(|o| {
                perms
                    .iter()
                    .map(|p| {
                        let r = o.relabel(p);
                        orders
                            .iter()
                            .position(|x| *x == r)
                            .expect("order families are closed under relabeling")
                    })
                    .collect()
            })
            .collect();
        let reductions = orders.iter().map(Order::reduction).collect();
        Ok(HarnessSpace {
            params,
            options,
            choices,
            tested: tested_ids,
            others,
            tested_read_only: tested_spec.mutability == Mutability::ReadOnly,
            orders,
            reductions,
            relabeled,
            perms,
        })
    }

    pub fn params(&self) -> EnumParams {
        self.params
    }

    /// Every accepted harness code, in a deterministic order.
    pub fn codes(&self) -> Vec<HarnessCode> {
        let p = self.params;
        let full_mask: u32 = if p.values == 32 {
            u32::MAX
        } else {
            (1u32 << p.values) - 1
        };
        let mut out = Vec::new();
        let mut ids = vec![0u16; p.invocations];
        for lens in compositions(p.invocations, p.sequences) {
            for order in 0..self.orders.len() {
                for m_pos in 0..p.invocations {
                    for &t in &self.tested {
                        ids[m_pos] = t;
                        let free: Vec<usize> = (0..p.invocations).filter(|&i| i != m_pos).collect();
                        let mut digits = vec![0usize; free.len()];
                        loop {
                            for (d, &pos) in digits.iter().zip(&free) {
                                ids[pos] = self.others[*d];
                            }
                            if self.accept(&lens, order, &ids, m_pos, full_mask) {
                                let mut code = Vec::with_capacity(2 + lens.len() + ids.len());
                                code.push(order as u16);
                                code.push(lens.len() as u16);
                                code.extend(lens.iter().map(|&l| l as u16));
                                code.extend_from_slice(&ids);
                                out.push(HarnessCode(code.into_boxed_slice()));
                            }
                            // odometer increment
                            let mut k = 0;
                            while k < digits.len() {
                                digits[k] += 1;
                                if digits[k] < self.others.len() {
                                    break;
                                }
                                digits[k] = 0;
                                k += 1;
                            }
                            if k == digits.len() || self.others.is_empty() {
                                break;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn accept(
        &self,
        lens: &[usize],
        order: usize,
        ids: &[u16],
        m_pos: usize,
        full_mask: u32,
    ) -> bool {
        let mask = ids
            .iter()
            .fold(0u32, |m, &i| m | self.choices[i as usize].values);
        if mask != full_mask {
            return false;
        }
        if self.options.filter_read_only && ids.iter().all(|&i| !self.choices[i as usize].update) {
            return false;
        }
        let mut starts = Vec::with_capacity(lens.len() + 1);
        starts.push(0);
        for &l in lens {
            starts.push(starts.last().unwrap() + l);
        }
        if self.options.filter_serialized && self.tested_read_only {
            let m_seq = starts.partition_point(|&s| s <= m_pos) - 1;
            let ord = &self.orders[order];
            let parallel_update = (0..lens.len()).any(|t| {
                ord.unordered(m_seq, t)
                    && ids[starts[t]..starts[t + 1]]
                        .iter()
                        .any(|&i| self.choices[i as usize].update)
            });
            if !parallel_update {
                return false;
            }
        }
        if self.options.symmetry && !self.is_canonical(&starts, order, ids) {
            return false;
        }
        true
    }

    /// The identity arrangement is no larger than any sequence permutation
    /// under (sequences lexicographically, then hb reduction pairs).
    fn is_canonical(&self, starts: &[usize], order: usize, ids: &[u16]) -> bool {
        let s = starts.len() - 1;
        let seq = |i: usize| &ids[starts[i]..starts[i + 1]];
        for (pi, perm) in self.perms.iter().enumerate().skip(1) {
            // position k of the permuted harness holds old sequence inv[k]
            let mut inv = vec![0; s];
            for (old, &new) in perm.iter().enumerate() {
                inv[new] = old;
            }
            let mut ord = std::cmp::Ordering::Equal;
            for (k, &old) in inv.iter().enumerate() {
                ord = seq(k).cmp(seq(old));
                if ord != std::cmp::Ordering::Equal {
                    break;
                }
            }
            if ord == std::cmp::Ordering::Equal {
                ord = self.reductions[order].cmp(&self.reductions[self.relabeled[order][pi]]);
            }
            if ord == std::cmp::Ordering::Greater {
                return false;
            }
        }
        true
    }

    pub fn decode(&self, code: &HarnessCode) -> Harness {
        let ids = code.ids();
        let mut seqs = Vec::with_capacity(code.num_sequences());
        let mut at = 0;
        for &l in code.lens() {
            let l = l as usize;
            seqs.push(
                ids[at..at + l]
                    .iter()
                    .map(|&i| self.choices[i as usize].inv.clone())
                    .collect(),
            );
            at += l;
        }
        Harness::new(seqs, &self.reductions[code.order()]).expect("enumerated orders are strict")
    }

    pub fn harnesses(&self) -> Vec<Harness> {
        self.codes().iter().map(|c| self.decode(c)).collect()
    }
}

/// All well-formed harnesses using methods from `core` plus exactly one
/// invocation of `tested`, with exactly `params.invocations` invocations,
/// argument values exactly `[0, params.values - 1]` and `params.sequences`
/// sequences; deduplicated up to symmetry and filtered per `options`.
pub fn construct_harnesses(
    spec: &SequentialSpec,
    core: &[&str],
    tested: &str,
    params: EnumParams,
    options: EnumOptions,
) -> Result<Vec<Harness>, EnumError> {
    Ok(HarnessSpace::new(spec, core, tested, params, options)?.harnesses())
}
