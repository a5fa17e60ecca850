mod common;

use atomicity_core::lincheck::harness_linearizable_outcome;
use atomicity_core::{
    atomic_outcomes, count_linearizations, is_atomic_outcome, linearizations, parse_harness,
    Harness,
};
use common::{brute_linearizations, brute_outcomes, map_spec, mutate, random_map_harness, rng};

const MAP_METHODS: [&str; 8] = [
    "put",
    "get",
    "remove",
    "containsKey",
    "clear",
    "size",
    "isEmpty",
    "putAll",
];

#[test]
fn linearization_count_matches_brute_force() {
    let mut r = rng(11);
    for _ in 0..200 {
        let h = random_map_harness(&mut r, 6, 3, &MAP_METHODS);
        let brute = brute_linearizations(&h);
        assert_eq!(count_linearizations(&h), brute.len() as u128, "{h}");
        let mut listed: Vec<_> = linearizations(&h).collect();
        listed.sort();
        let mut expected = brute;
        expected.sort();
        assert_eq!(listed, expected, "{h}");
    }
}

#[test]
fn atomic_outcomes_match_brute_force_replay() {
    let spec = map_spec();
    let mut r = rng(12);
    for _ in 0..150 {
        let h = random_map_harness(&mut r, 6, 3, &MAP_METHODS);
        let set = atomic_outcomes(&h, &spec).unwrap();
        let got: Vec<_> = set.outcomes().to_vec();
        let want: Vec<_> = brute_outcomes(&h, &spec).into_iter().collect();
        assert_eq!(got, want, "{h}");
        assert!(set.len() as u128 <= count_linearizations(&h));
    }
}

#[test]
fn oracle_agrees_with_history_checker() {
    let spec = map_spec();
    let mut r = rng(13);
    for _ in 0..100 {
        let h = random_map_harness(&mut r, 5, 3, &MAP_METHODS);
        let set = atomic_outcomes(&h, &spec).unwrap();
        let mut probes: Vec<_> = set.outcomes().to_vec();
        for k in 0..50 {
            let base = &set.outcomes()[k % set.len()];
            probes.push(mutate(base, &mut r));
        }
        for o in &probes {
            assert_eq!(
                harness_linearizable_outcome(&h, o, &spec).unwrap(),
                is_atomic_outcome(o, &set),
                "{h} with {o}"
            );
        }
    }
}

#[test]
fn extra_happens_before_never_grows_the_set() {
    let spec = map_spec();
    let mut r = rng(14);
    for _ in 0..100 {
        let h = random_map_harness(&mut r, 6, 3, &MAP_METHODS);
        let s = h.num_sequences();
        // add every pair compatible with a topological order of the existing hb
        let lin = linearizations(
            &Harness::new(vec![vec![h.sequences()[0][0].clone()]; s], h.hb()).unwrap(),
        )
        .next()
        .unwrap();
        let mut total = Vec::new();
        for a in 0..s {
            for b in a + 1..s {
                total.push((lin[a], lin[b]));
            }
        }
        let stronger = Harness::new(h.sequences().to_vec(), &total).unwrap();
        let weak = atomic_outcomes(&h, &spec).unwrap();
        let strong = atomic_outcomes(&stronger, &spec).unwrap();
        assert!(
            strong.outcomes().iter().all(|o| weak.contains(o)),
            "{h} vs {stronger}"
        );
        assert_eq!(count_linearizations(&stronger), 1);
        assert_eq!(strong.len(), 1);
    }
}

#[test]
fn compression_on_clear_harness() {
    let h = parse_harness("[put(0,0)], [clear(); put(1,1); containsKey(1)]").unwrap();
    let set = atomic_outcomes(&h, &map_spec()).unwrap();
    assert_eq!(count_linearizations(&h), 4);
    assert_eq!(set.len(), 1);
}
