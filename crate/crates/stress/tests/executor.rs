use std::time::Duration;

use atomicity_core::lincheck::is_linearizable;
use atomicity_core::{atomic_outcomes, parse_harness, Outcome};
use atomicity_stress::executor::{
    record_history_trial, run_trial, stress, PhasePlan, StressBudget, StressOptions, Verdict,
};
use atomicity_stress::sut::builtin_suts;

const CLEAR: &str = "[put(0,0)], [clear(); put(1,1); containsKey(1)]";
const PUT_ALL: &str = "[putAll({0=1,1=0})], [get(0); remove(1)]";

#[test]
fn phase_plan_follows_happens_before() {
    let h = parse_harness("[get(0)], [get(1)], [put(0,0)], {0 < 2, 1 < 2}").unwrap();
    let plan = PhasePlan::new(&h);
    assert_eq!(plan.phases, vec![vec![0, 1], vec![2]]);
    assert_eq!(plan.preds[2], vec![0, 1]);
    let chain = parse_harness("[get(0)], [get(1)], [put(0,0)], {2 < 1, 1 < 0}").unwrap();
    assert_eq!(
        PhasePlan::new(&chain).phases,
        vec![vec![2], vec![1], vec![0]]
    );
}

#[test]
fn trial_fills_slots_in_listing_order() {
    let reg = builtin_suts();
    let sut = reg.get("locked-map").unwrap();
    let h = parse_harness("[put(0,5); get(0); size()]").unwrap();
    let o = run_trial(&h, sut).unwrap();
    assert_eq!(o.0, sut.spec().replay(h.invocations()).unwrap());
}

#[test]
fn serialized_harness_is_always_atomic() {
    let reg = builtin_suts();
    // a total order over sequences leaves a single linearization, even on a buggy object
    let sut = reg.get("map-nonatomic-clear").unwrap();
    let h = parse_harness("[put(0,0)], [clear(); put(1,1); containsKey(1)], {0 < 1}").unwrap();
    let r = stress(
        &h,
        sut,
        &sut.spec(),
        StressBudget::trials(20_000),
        StressOptions::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::AtomicSoFar);
    assert_eq!(r.histogram.entries.len(), 1);
}

#[test]
fn locked_map_never_shows_non_atomic_outcomes() {
    let reg = builtin_suts();
    let sut = reg.get("locked-map").unwrap();
    for text in [
        CLEAR,
        PUT_ALL,
        "[size()], [put(0,0); put(1,1)]",
        "[put(1,1); size()], [put(0,0); remove(1)]",
    ] {
        let h = parse_harness(text).unwrap();
        let r = stress(
            &h,
            sut,
            &sut.spec(),
            StressBudget::trials(1_000_000),
            StressOptions::default(),
        )
        .unwrap();
        assert_eq!(r.histogram.total, 1_000_000);
        assert_eq!(r.verdict, Verdict::AtomicSoFar, "{text}");
    }
}

#[test]
fn seeded_bugs_show_their_outcomes() {
    let reg = builtin_suts();
    for (name, text, bad) in [
        ("map-nonatomic-clear", CLEAR, "(null,(),null,false)"),
        ("map-nonatomic-putall", PUT_ALL, "((),1,null)"),
        (
            "map-nonatomic-size",
            "[put(1,1); size()], [put(0,0); remove(1)]",
            "(null,0,null,1)",
        ),
        (
            "queue-nonatomic-containsall",
            "[poll(); offer(1)], [offer(0); containsAll({0,1})]",
            "(0,true,true,true)",
        ),
        (
            "deque-nonatomic-pollLast",
            "[offer(0); pollLast()], [offerFirst(1)]",
            "(true,1,true)",
        ),
    ] {
        let sut = reg.get(name).unwrap();
        let h = parse_harness(text).unwrap();
        let r = stress(
            &h,
            sut,
            &sut.spec(),
            StressBudget::time(Duration::from_secs(2)),
            StressOptions {
                fail_fast: true,
                ..Default::default()
            },
        )
        .unwrap();
        let bad = atomicity_core::parse_outcome(bad).unwrap();
        assert!(
            r.histogram
                .entries
                .iter()
                .any(|e| e.outcome == bad && !e.atomic),
            "{name}: {:?}",
            r.histogram
        );
        assert!(matches!(r.verdict, Verdict::Violation { .. }));
    }
}

#[test]
fn trial_budget_of_one() {
    let reg = builtin_suts();
    let sut = reg.get("locked-map").unwrap();
    let h = parse_harness(CLEAR).unwrap();
    let r = stress(
        &h,
        sut,
        &sut.spec(),
        StressBudget::trials(1),
        StressOptions::default(),
    )
    .unwrap();
    assert_eq!(r.histogram.total, 1);
    let r = stress(
        &h,
        sut,
        &sut.spec(),
        StressBudget::trials(5000).with_workers(3),
        StressOptions::default(),
    )
    .unwrap();
    assert_eq!(r.histogram.total, 5000);
    assert!(stress(
        &h,
        sut,
        &sut.spec(),
        StressBudget::trials(0),
        StressOptions::default()
    )
    .is_err());
}

#[test]
fn recorded_histories_contain_program_order_and_are_linearizable_when_locked() {
    let reg = builtin_suts();
    let sut = reg.get("locked-map").unwrap();
    let spec = sut.spec();
    let h = parse_harness(CLEAR).unwrap();
    let serial = parse_harness("[put(0,0)], [clear(); put(1,1); containsKey(1)], {0 < 1}").unwrap();
    for _ in 0..200 {
        let hist = record_history_trial(&h, sut).unwrap();
        for (a, b) in h.invocation_order().pairs() {
            assert!(hist.hb().lt(a, b));
        }
        assert!(is_linearizable(&hist, &spec).unwrap());
        let hist = record_history_trial(&serial, sut).unwrap();
        assert!(hist.hb().is_total());
    }
}

#[test]
fn validation_mode_upholds_linearizable_implies_atomic() {
    let reg = builtin_suts();
    for (name, text) in [
        ("locked-map", CLEAR),
        ("locked-map", PUT_ALL),
        ("map-nonatomic-clear", CLEAR),
    ] {
        let sut = reg.get(name).unwrap();
        let h = parse_harness(text).unwrap();
        let opts = StressOptions {
            validate: true,
            ..Default::default()
        };
        let r = stress(&h, sut, &sut.spec(), StressBudget::trials(20_000), opts).unwrap();
        let v = r.validation.unwrap();
        assert_eq!(v.histories, 20_000);
        assert_eq!(v.linearizable_non_atomic, 0, "{name} {text}");
        let set = atomic_outcomes(&h, &sut.spec()).unwrap();
        if name.starts_with("locked") {
            assert_eq!(v.linearizable, v.histories);
        }
        let _: &[Outcome] = set.outcomes();
    }
}
