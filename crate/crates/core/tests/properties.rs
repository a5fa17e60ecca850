mod common;

use atomicity_core::enumerate::method_invocations;
use atomicity_core::{
    atomic_outcomes, parse_harness, Family, Harness, History, Invocation, Mutability,
    SequentialSpec, Value,
};
use common::{random_map_harness, rng};
use itertools::Itertools;
use proptest::prelude::*;

const FAMILIES: [Family; 4] = [
    Family::OrderedMap,
    Family::FifoQueue,
    Family::Deque,
    Family::OrderedSet,
];

fn all_invocations(spec: &SequentialSpec) -> Vec<Invocation> {
    spec.methods
        .iter()
        .flat_map(|m| method_invocations(spec, &m.name, 3).unwrap())
        .collect()
}

fn family_and_ops() -> impl Strategy<Value = (Family, Vec<usize>)> {
    (
        0..FAMILIES.len(),
        prop::collection::vec(any::<usize>(), 0..20),
    )
        .prop_map(|(f, ops)| (FAMILIES[f], ops))
}

fn harness_strategy() -> impl Strategy<Value = Harness> {
    any::<u64>().prop_map(|seed| {
        let mut r = rng(seed);
        random_map_harness(
            &mut r,
            7,
            4,
            &[
                "put",
                "get",
                "remove",
                "containsKey",
                "clear",
                "size",
                "putAll",
            ],
        )
    })
}

proptest! {
    #[test]
    fn read_only_methods_leave_state_unchanged((family, ops) in family_and_ops(), probe in any::<usize>()) {
        let spec = SequentialSpec::new(family);
        let invs = all_invocations(&spec);
        let mut state = spec.new_state();
        for op in ops {
            spec.apply(&mut state, &invs[op % invs.len()]).unwrap();
        }
        let ro: Vec<_> = invs.iter().filter(|i| spec.method(&i.method).unwrap().mutability == Mutability::ReadOnly).collect();
        let before = state.clone();
        spec.apply(&mut state, ro[probe % ro.len()]).unwrap();
        prop_assert_eq!(before, state);
    }

    #[test]
    fn apply_is_deterministic((family, ops) in family_and_ops()) {
        let spec = SequentialSpec::new(family);
        let invs = all_invocations(&spec);
        let seq: Vec<_> = ops.iter().map(|&o| &invs[o % invs.len()]).collect();
        prop_assert_eq!(spec.replay(seq.iter().copied()).unwrap(), spec.replay(seq.iter().copied()).unwrap());
    }

    #[test]
    fn size_agrees_with_is_empty((family, ops) in family_and_ops()) {
        let spec = SequentialSpec::new(family);
        let invs = all_invocations(&spec);
        let mut state = spec.new_state();
        for op in ops {
            spec.apply(&mut state, &invs[op % invs.len()]).unwrap();
            let size = spec.apply(&mut state, &Invocation::new("size", vec![])).unwrap();
            let empty = spec.apply(&mut state, &Invocation::new("isEmpty", vec![])).unwrap();
            prop_assert_eq!(empty, Value::Bool(size == Value::Int(0)));
        }
    }

    #[test]
    fn put_then_get_returns_value(ops in prop::collection::vec(any::<usize>(), 0..20), k in 0i64..3, v in 0i64..3) {
        let spec = SequentialSpec::new(Family::OrderedMap);
        let invs = all_invocations(&spec);
        let mut state = spec.new_state();
        for op in ops {
            spec.apply(&mut state, &invs[op % invs.len()]).unwrap();
        }
        spec.apply(&mut state, &Invocation::new("put", vec![k.into(), v.into()])).unwrap();
        prop_assert_eq!(spec.apply(&mut state, &Invocation::new("get", vec![k.into()])).unwrap(), Value::Int(v));
        prop_assert_eq!(spec.apply(&mut state, &Invocation::new("remove", vec![k.into()])).unwrap(), Value::Int(v));
        prop_assert_eq!(spec.apply(&mut state, &Invocation::new("containsKey", vec![k.into()])).unwrap(), Value::Bool(false));
    }

    #[test]
    fn format_parse_round_trip(h in harness_strategy()) {
        let text = h.to_string();
        prop_assert_eq!(parse_harness(&text).unwrap(), h.clone());
        let spaced = text.replace(", ", " ,  ").replace(';', " ; ");
        prop_assert_eq!(parse_harness(&spaced).unwrap(), h);
    }

    #[test]
    fn canonical_form_is_idempotent_and_class_invariant(h in harness_strategy()) {
        let c = h.canonicalize();
        prop_assert_eq!(c.canonicalize(), c.clone());
        if h.num_sequences() <= 4 {
            for perm in (0..h.num_sequences()).permutations(h.num_sequences()) {
                prop_assert_eq!(h.permute(&perm).canonicalize(), c.clone());
            }
        }
    }

    #[test]
    fn invoc_index_is_a_bijection(h in harness_strategy()) {
        let idx = h.invoc_index();
        prop_assert_eq!(idx.len(), h.num_invocations());
        let mut seen = vec![false; idx.len()];
        for (s, seq) in h.sequences().iter().enumerate() {
            for p in 0..seq.len() {
                let slot = idx.slot(s, p);
                prop_assert!(!seen[slot]);
                seen[slot] = true;
                prop_assert_eq!(idx.locate(slot), (s, p));
            }
        }
        prop_assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn singletonize_preserves_invocations(h in harness_strategy(), pick in any::<usize>()) {
        let spec = SequentialSpec::new(Family::OrderedMap);
        let set = atomic_outcomes(&h, &spec).unwrap();
        let o = set.outcomes()[pick % set.len()].clone();
        let hb = h.invocation_order().pairs();
        let hist = History::new(h.clone(), o, &hb).unwrap();
        let single = hist.singletonize();
        prop_assert_eq!(single.num_sequences(), h.num_invocations());
        prop_assert_eq!(single.stats().per_method_invocations, h.stats().per_method_invocations);
        prop_assert_eq!(single.invocation_order(), h.invocation_order());
    }
}

#[test]
fn symmetric_variant_of_three_sequence_harness() {
    let a = parse_harness("[put(0,0); put(2,0)], [clear(); put(1,1); containsKey(1); get(2)], [put(3,1)], {0 < 2, 1 < 2}").unwrap();
    let b = parse_harness("[clear(); put(1,1); containsKey(1); get(2)], [put(3,1)], [put(0,0); put(2,0)], {0 < 1, 2 < 1}").unwrap();
    assert!(a.is_symmetric_to(&b));
    assert_eq!(a.canonicalize(), b.canonicalize());
}
