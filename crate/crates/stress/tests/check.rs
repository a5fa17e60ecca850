use std::time::Duration;

use atomicity_core::{atomic_outcomes, is_atomic_outcome, parse_harness, EnumParams, Family};
use atomicity_stress::check::{check, rounds, CheckConfig, CheckError};
use atomicity_stress::report::{
    report_table, write_report, CheckReport, ReportFormat, ReportVerdict,
};
use atomicity_stress::sut::builtin_suts;

fn config(sut: &str, method: &str, bounds: EnumParams) -> CheckConfig {
    CheckConfig {
        family: Family::OrderedMap,
        method: method.into(),
        sut: sut.into(),
        bounds,
        trials_per_harness: Some(2000),
        seed: 42,
        ..CheckConfig::default()
    }
}

#[test]
fn seeded_clear_is_reported_with_replayable_witness() {
    let mut cfg = config("map-nonatomic-clear", "clear", EnumParams::new(4, 2, 2));
    cfg.stop_within_chunk = true;
    let report = check(&cfg, &builtin_suts()).unwrap();
    let ReportVerdict::NonAtomic {
        harness,
        outcome,
        frequency,
        ..
    } = &report.verdict
    else {
        panic!("expected a violation: {}", report_table(&report));
    };
    assert!(*frequency > 0);
    let h = parse_harness(harness).unwrap();
    assert_eq!(h.stats().count_of("clear"), 1);
    let set = atomic_outcomes(&h, &cfg.spec().unwrap()).unwrap();
    assert!(!is_atomic_outcome(outcome, &set));
    assert!(report.is_non_atomic());
    assert!(report_table(&report).contains("NON-ATOMIC"));
}

#[test]
fn locked_map_exhausts_small_bounds() {
    let cfg = config("locked-map", "clear", EnumParams::new(3, 2, 2));
    let report = check(&cfg, &builtin_suts()).unwrap();
    assert_eq!(report.verdict, ReportVerdict::Exhausted);
    assert_eq!(report.non_atomic_outcomes(), 0);
    assert_eq!(report.harnesses_tested, 6 + 612);
}

#[test]
fn same_seed_same_attempt_order() {
    let cfg = config("locked-map", "size", EnumParams::new(3, 2, 2));
    let order = |cfg: &CheckConfig| -> Vec<String> {
        rounds(cfg)
            .unwrap()
            .flat_map(|r| {
                let r = r.unwrap();
                (0..r.len())
                    .map(|i| r.harness(i).to_string())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    assert_eq!(order(&cfg), order(&cfg));
    let a = check(&cfg, &builtin_suts()).unwrap();
    let b = check(&cfg, &builtin_suts()).unwrap();
    let names = |r: &CheckReport| {
        r.records
            .iter()
            .map(|x| x.harness.clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(names(&a), names(&b));
    assert_eq!(names(&a), order(&cfg));
    let mut other = cfg.clone();
    other.seed = 7;
    assert_ne!(order(&other), order(&cfg));
}

#[test]
fn global_timeout_ends_the_run() {
    let mut cfg = config("locked-map", "putAll", EnumParams::new(4, 2, 2));
    cfg.trials_per_harness = None;
    cfg.time_per_harness = Duration::from_millis(20);
    cfg.global_timeout = Some(Duration::from_millis(300));
    let report = check(&cfg, &builtin_suts()).unwrap();
    assert_eq!(report.verdict, ReportVerdict::Timeout);
    assert!(report.harnesses_tested > 0);
}

#[test]
fn configuration_errors() {
    let reg = builtin_suts();
    let bad_sut = config("no-such-object", "clear", EnumParams::new(2, 2, 2));
    assert!(matches!(
        check(&bad_sut, &reg),
        Err(CheckError::UnknownSut(_))
    ));
    let mut core_method = config("locked-map", "put", EnumParams::new(2, 2, 2));
    core_method.core = vec!["put".into(), "get".into()];
    assert!(matches!(
        check(&core_method, &reg),
        Err(CheckError::Config(_))
    ));
    let mut wrong_family = config("locked-queue", "clear", EnumParams::new(2, 2, 2));
    wrong_family.family = Family::OrderedMap;
    assert!(matches!(
        check(&wrong_family, &reg),
        Err(CheckError::FamilyMismatch { .. })
    ));
    let mut zero_chunk = config("locked-map", "clear", EnumParams::new(2, 2, 2));
    zero_chunk.chunk_size = 0;
    assert!(check(&zero_chunk, &reg).is_err());
}

#[test]
fn json_report_round_trips() {
    let mut cfg = config("map-nonatomic-putall", "putAll", EnumParams::new(3, 2, 2));
    cfg.stop_within_chunk = true;
    let report = check(&cfg, &builtin_suts()).unwrap();
    let mut buf = Vec::new();
    write_report(&report, ReportFormat::Json, &mut buf).unwrap();
    let back: CheckReport = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back, report);
    let mut table = Vec::new();
    write_report(&report, ReportFormat::Table, &mut table).unwrap();
    let table = String::from_utf8(table).unwrap();
    assert!(table.contains("params") && table.contains("frequency"));
}

#[test]
fn empty_run_is_exhausted_with_no_rows() {
    // clear takes no arguments, so (1,1,1) has no harness
    let cfg = config("locked-map", "clear", EnumParams::new(1, 1, 1));
    let report = check(&cfg, &builtin_suts()).unwrap();
    assert_eq!(report.verdict, ReportVerdict::Exhausted);
    assert!(report.records.is_empty());
    assert!(report_table(&report).contains("EXHAUSTED"));
}

#[test]
fn config_reads_from_toml_shaped_json() {
    let cfg: CheckConfig = serde_json::from_str(
        r#"{"family":"queue","method":"containsAll","sut":"queue-nonatomic-containsall","bounds":{"invocations":4,"values":2,"sequences":2},"time_per_harness":0.5,"schedule":"graded"}"#,
    )
    .unwrap();
    assert_eq!(cfg.family, Family::FifoQueue);
    assert_eq!(cfg.time_per_harness, Duration::from_millis(500));
    assert_eq!(cfg.chunk_size, 100);
    cfg.validate().unwrap();
}

#[test]
fn default_core_leaves_out_the_method_under_test() {
    let mut cfg = config(
        "deque-nonatomic-pollLast",
        "pollLast",
        EnumParams::new(3, 2, 2),
    );
    cfg.family = Family::Deque;
    cfg.stop_within_chunk = true;
    let core = cfg.core_methods().unwrap();
    assert!(!core.contains(&"pollLast".to_string()));
    assert!(core.contains(&"pollFirst".to_string()));
    let report = check(&cfg, &builtin_suts()).unwrap();
    assert!(report.is_non_atomic(), "{:?}", report.verdict);
}
