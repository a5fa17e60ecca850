//! Independent brute-force reference implementations shared by the
//! integration tests. Nothing here calls into the code paths under test
//! beyond the basic data types and the sequential specification.

#![allow(dead_code)]

use std::collections::BTreeSet;

use atomicity_core::enumerate::{filter_all_read_only, filter_serialized_read_only_mut};
use atomicity_core::order::all_strict_orders;
use atomicity_core::{EnumParams, Family, Harness, Invocation, Outcome, SequentialSpec, Value};
use itertools::Itertools;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Argument tuples for the map methods over `[0, vals)`, written out by hand.
pub fn map_invocations(method: &str, vals: i64) -> Vec<Invocation> {
    let ints = || (0..vals).map(Value::Int);
    match method {
        "put" => ints()
            .cartesian_product(ints())
            .map(|(k, v)| Invocation::new("put", vec![k, v]))
            .collect(),
        "get" | "remove" | "containsKey" | "containsValue" => {
            ints().map(|k| Invocation::new(method, vec![k])).collect()
        }
        "clear" | "size" | "isEmpty" => vec![Invocation::new(method, vec![])],
        "putAll" => {
            let mut out = Vec::new();
            for (k1, k2) in (0..vals).tuple_combinations() {
                for v1 in 0..vals {
                    for v2 in 0..vals {
                        out.push(Invocation::new(
                            "putAll",
                            vec![Value::Map(vec![
                                (k1.into(), v1.into()),
                                (k2.into(), v2.into()),
                            ])],
                        ));
                    }
                }
            }
            out
        }
        other => panic!("no hand-written domain for {other}"),
    }
}

/// A random well-formed map harness: random sequence lengths, methods and
/// arguments, and a random acyclic happens-before.
pub fn random_map_harness(
    rng: &mut ChaCha8Rng,
    max_invocations: usize,
    max_sequences: usize,
    methods: &[&str],
) -> Harness {
    let n = 1 + below(rng, max_invocations);
    let s = 1 + below(rng, max_sequences.min(n));
    let mut lens = vec![1; s];
    for _ in s..n {
        lens[below(rng, s)] += 1;
    }
    let seqs: Vec<Vec<Invocation>> = lens
        .iter()
        .map(|&l| {
            (0..l)
                .map(|_| {
                    let m = methods[below(rng, methods.len())];
                    let dom = map_invocations(m, 2);
                    dom[below(rng, dom.len())].clone()
                })
                .collect()
        })
        .collect();
    // orient pairs along a random ranking so the relation is acyclic
    let mut rank: Vec<usize> = (0..s).collect();
    for i in (1..s).rev() {
        rank.swap(i, below(rng, i + 1));
    }
    let mut hb = Vec::new();
    for a in 0..s {
        for b in 0..s {
            if rank[a] < rank[b] && below(rng, 3) == 0 {
                hb.push((a, b));
            }
        }
    }
    Harness::new(seqs, &hb).expect("ranked pairs are acyclic")
}

/// Slot ranges per sequence in listing order.
fn slots(h: &Harness) -> Vec<std::ops::Range<usize>> {
    let mut at = 0;
    h.sequences()
        .iter()
        .map(|s| {
            let r = at..at + s.len();
            at += s.len();
            r
        })
        .collect()
}

/// Linearizations by filtering all `n!` permutations: program order holds
/// inside each sequence and every invocation of `i` precedes every
/// invocation of `j` whenever `i` happens before `j`.
pub fn brute_linearizations(h: &Harness) -> Vec<Vec<usize>> {
    let n = h.num_invocations();
    let ranges = slots(h);
    let s = h.num_sequences();
    let mut closed = vec![vec![false; s]; s];
    for &(a, b) in h.hb() {
        closed[a][b] = true;
    }
    for k in 0..s {
        for a in 0..s {
            for b in 0..s {
                if closed[a][k] && closed[k][b] {
                    closed[a][b] = true;
                }
            }
        }
    }
    (0..n)
        .permutations(n)
        .filter(|perm| {
            let mut pos = vec![0; n];
            for (p, &i) in perm.iter().enumerate() {
                pos[i] = p;
            }
            let program = ranges
                .iter()
                .all(|r| r.clone().tuple_windows().all(|(a, b)| pos[a] < pos[b]));
            let hb = (0..s)
                .cartesian_product(0..s)
                .filter(|&(a, b)| closed[a][b])
                .all(|(a, b)| {
                    ranges[a]
                        .clone()
                        .all(|x| ranges[b].clone().all(|y| pos[x] < pos[y]))
                });
            program && hb
        })
        .collect()
}

pub fn brute_outcomes(h: &Harness, spec: &SequentialSpec) -> BTreeSet<Outcome> {
    let invs: Vec<&Invocation> = h.invocations().collect();
    brute_linearizations(h)
        .into_iter()
        .map(|lin| {
            let mut state = spec.new_state();
            let mut out = vec![Value::Unit; invs.len()];
            for i in lin {
                out[i] = spec.apply(&mut state, invs[i]).unwrap();
            }
            Outcome(out)
        })
        .collect()
}

pub fn map_spec() -> SequentialSpec {
    SequentialSpec::new(Family::OrderedMap)
}

/// Perturbs one slot of `o` to a nearby value of a plausible return kind.
pub fn mutate(o: &Outcome, rng: &mut ChaCha8Rng) -> Outcome {
    let mut v = o.0.clone();
    let i = below(rng, v.len());
    v[i] = match &v[i] {
        Value::Null => Value::Int(below(rng, 2) as i64),
        Value::Int(x) => {
            if below(rng, 2) == 0 {
                Value::Null
            } else {
                Value::Int(x + 1)
            }
        }
        Value::Bool(b) => Value::Bool(!b),
        other => other.clone(),
    };
    Outcome(v)
}

pub const MAP_CORE: [&str; 4] = ["put", "get", "remove", "containsKey"];

pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    (0..parts)
        .map(|_| 1..=total)
        .multi_cartesian_product()
        .filter(|c| c.iter().sum::<usize>() == total)
        .collect()
}

/// Every labeled harness with exactly `p.invocations` invocations over
/// `MAP_CORE` plus one `m`, arguments in `[0, p.values)`, and `p.sequences`
/// sequences under any strict partial order — no symmetry reduction.
pub fn brute_harnesses(m: &str, p: EnumParams, exact_values: bool) -> Vec<Harness> {
    let core_invs: Vec<Invocation> = MAP_CORE
        .iter()
        .flat_map(|c| map_invocations(c, p.values as i64))
        .collect();
    let m_invs = map_invocations(m, p.values as i64);
    let mut out = Vec::new();
    for lens in compositions(p.invocations, p.sequences) {
        for order in all_strict_orders(p.sequences) {
            let hb = order.pairs();
            for m_pos in 0..p.invocations {
                for mi in &m_invs {
                    for rest in (0..p.invocations - 1)
                        .map(|_| core_invs.iter())
                        .multi_cartesian_product()
                    {
                        let mut flat: Vec<Invocation> = rest.into_iter().cloned().collect();
                        flat.insert(m_pos, mi.clone());
                        let values: BTreeSet<Value> = flat
                            .iter()
                            .flat_map(|inv| {
                                let mut vs = Vec::new();
                                for a in &inv.args {
                                    a.for_each_atom(&mut |v| vs.push(v.clone()));
                                }
                                vs
                            })
                            .collect();
                        if exact_values && values.len() != p.values {
                            continue;
                        }
                        let mut seqs = Vec::new();
                        let mut it = flat.into_iter();
                        for &l in &lens {
                            seqs.push(it.by_ref().take(l).collect());
                        }
                        out.push(Harness::new(seqs, &hb).unwrap());
                    }
                }
            }
        }
    }
    out
}

/// Drops what the read-only filters drop.
pub fn keep(h: &Harness, m: &str, spec: &SequentialSpec) -> bool {
    !filter_all_read_only(h, spec).unwrap() && !filter_serialized_read_only_mut(h, m, spec).unwrap()
}
