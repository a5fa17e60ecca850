//! The checking loop: for growing enumeration parameters, enumerate the
//! harnesses of the method under test, shuffle them with a fixed seed, and
//! stress-test them chunk by chunk until one exposes a non-atomic outcome.

use std::time::{Duration, Instant};

use atomicity_core::{
    atomic_outcomes, is_atomic_outcome, parse_harness, shuffle, EnumError, EnumOptions, EnumParams,
    Family, Harness, HarnessCode, HarnessSpace, MethodOverride, ParamSchedule, ScheduleKind,
    SequentialSpec, SpecError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::executor::{stress_with, StressBudget, StressError, StressOptions, Verdict};
use crate::report::{CheckReport, HarnessRecord, ReportVerdict, SCHEMA_VERSION};
use crate::sut::SutRegistry;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("unknown system under test `{0}`")]
    UnknownSut(String),
    #[error("system under test `{sut}` implements the {actual} family, not {expected}")]
    FamilyMismatch {
        sut: String,
        expected: Family,
        actual: Family,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error("stress testing {harness}: {source}")]
    Stress {
        harness: String,
        source: StressError,
    },
    #[error("reported outcome {outcome} of {harness} is atomic on re-check")]
    Revalidation { harness: String, outcome: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    pub family: Family,
    /// Core methods; empty means the family's default core set without
    /// `method`.
    pub core: Vec<String>,
    pub method: String,
    pub sut: String,
    pub bounds: EnumParams,
    pub schedule: ScheduleKind,
    #[serde(with = "duration_secs")]
    pub time_per_harness: Duration,
    pub trials_per_harness: Option<u64>,
    pub chunk_size: usize,
    pub seed: u64,
    pub workers: usize,
    #[serde(with = "opt_duration_secs")]
    pub global_timeout: Option<Duration>,
    pub enumeration: EnumOptions,
    /// Stop immediately at the violating harness instead of finishing its chunk.
    pub stop_within_chunk: bool,
    pub overrides: Vec<MethodOverride>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            family: Family::OrderedMap,
            core: Vec::new(),
            method: String::new(),
            sut: String::new(),
            bounds: EnumParams::new(6, 2, 2),
            schedule: ScheduleKind::Diagonal,
            time_per_harness: Duration::from_secs(1),
            trials_per_harness: None,
            chunk_size: 100,
            seed: 0,
            workers: 1,
            global_timeout: None,
            enumeration: EnumOptions::default(),
            stop_within_chunk: false,
            overrides: Vec::new(),
        }
    }
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

mod opt_duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Option::<f64>::deserialize(d)?
            .map(|secs| Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl CheckConfig {
    /// The specification with overrides applied and the configured core.
    /// Without a configured core, the family's default core minus the method
    /// under test is used, so e.g. deque `pollLast` can be checked against the
    /// other deque methods.
    pub fn spec(&self) -> Result<SequentialSpec, CheckError> {
        let spec = SequentialSpec::new(self.family).with_overrides(&self.overrides)?;
        if !self.core.is_empty() {
            return Ok(spec.with_core(&self.core)?);
        }
        let core: Vec<String> = spec
            .core_methods()
            .into_iter()
            .filter(|m| *m != self.method)
            .map(str::to_string)
            .collect();
        Ok(spec.with_core(&core)?)
    }

    pub fn core_methods(&self) -> Result<Vec<String>, CheckError> {
        Ok(self
            .spec()?
            .core_methods()
            .into_iter()
            .map(str::to_string)
            .collect())
    }

    pub fn validate(&self) -> Result<(), CheckError> {
        if self.chunk_size == 0 {
            return Err(CheckError::Config("chunk size must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(CheckError::Config("worker count must be at least 1".into()));
        }
        if !self.bounds.is_valid() {
            return Err(CheckError::Config(format!(
                "bounds {} need invocations >= sequences >= 1 and values >= 1",
                self.bounds
            )));
        }
        let spec = self.spec()?;
        spec.method(&self.method)?;
        if self.core_methods()?.contains(&self.method) {
            return Err(CheckError::Config(format!(
                "method under test `{}` is a core method",
                self.method
            )));
        }
        Ok(())
    }

    pub fn schedule(&self) -> ParamSchedule {
        ParamSchedule::new(self.schedule, Some(self.bounds))
    }

    fn budget(&self) -> StressBudget {
        StressBudget {
            time: if self.trials_per_harness.is_some() {
                None
            } else {
                Some(self.time_per_harness)
            },
            trials: self.trials_per_harness,
            workers: self.workers,
        }
    }
}

/// The harnesses of one round in the order they are attempted.
pub struct Round {
    pub params: EnumParams,
    pub space: HarnessSpace,
    pub codes: Vec<HarnessCode>,
}

impl Round {
    pub fn new(
        cfg: &CheckConfig,
        spec: &SequentialSpec,
        params: EnumParams,
    ) -> Result<Self, CheckError> {
        let core = cfg.core_methods()?;
        let core: Vec<&str> = core.iter().map(String::as_str).collect();
        let space = HarnessSpace::new(spec, &core, &cfg.method, params, cfg.enumeration)?;
        let mut codes = space.codes();
        shuffle(&mut codes, cfg.seed);
        Ok(Round {
            params,
            space,
            codes,
        })
    }

    pub fn harness(&self, i: usize) -> Harness {
        self.space.decode(&self.codes[i])
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// Every round of `cfg`, in schedule order.
pub fn rounds(
    cfg: &CheckConfig,
) -> Result<impl Iterator<Item = Result<Round, CheckError>> + '_, CheckError> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    Ok(cfg.schedule().map(move |p| Round::new(cfg, &spec, p)))
}

pub fn check(cfg: &CheckConfig, registry: &SutRegistry) -> Result<CheckReport, CheckError> {
    check_with_progress(cfg, registry, &mut |_| {})
}

/// Runs the checking loop, calling `progress` after every harness.
pub fn check_with_progress(
    cfg: &CheckConfig,
    registry: &SutRegistry,
    progress: &mut dyn FnMut(&HarnessRecord),
) -> Result<CheckReport, CheckError> {
    cfg.validate()?;
    let sut = registry
        .get(&cfg.sut)
        .ok_or_else(|| CheckError::UnknownSut(cfg.sut.clone()))?;
    if sut.family != cfg.family {
        return Err(CheckError::FamilyMismatch {
            sut: cfg.sut.clone(),
            expected: cfg.family,
            actual: sut.family,
        });
    }
    let spec = cfg.spec()?;
    let start = Instant::now();
    let mut report = CheckReport {
        schema_version: SCHEMA_VERSION,
        family: cfg.family,
        core: cfg.core_methods()?,
        method: cfg.method.clone(),
        sut: cfg.sut.clone(),
        seed: cfg.seed,
        bounds: cfg.bounds,
        records: Vec::new(),
        verdict: ReportVerdict::Exhausted,
        harnesses_tested: 0,
        total_time: Duration::ZERO,
    };
    let opts = StressOptions::default();
    'rounds: for round in rounds(cfg)? {
        let round = round?;
        let mut first_violation: Option<usize> = None;
        for chunk in (0..round.len())
            .step_by(cfg.chunk_size)
            .map(|s| s..(s + cfg.chunk_size).min(round.len()))
        {
            for i in chunk {
                if cfg.global_timeout.is_some_and(|t| start.elapsed() >= t) {
                    report.verdict = ReportVerdict::Timeout;
                    break 'rounds;
                }
                let h = round.harness(i);
                let set = atomic_outcomes(&h, &spec)?;
                let result =
                    stress_with(&h, &set, sut, &spec, cfg.budget(), opts).map_err(|source| {
                        CheckError::Stress {
                            harness: h.to_string(),
                            source,
                        }
                    })?;
                let record = HarnessRecord {
                    params: round.params,
                    index: i,
                    round_total: round.len(),
                    harness: h.to_string(),
                    histogram: result.histogram,
                };
                progress(&record);
                report.records.push(record);
                report.harnesses_tested += 1;
                if matches!(result.verdict, Verdict::Violation { .. }) && first_violation.is_none()
                {
                    first_violation = Some(report.records.len() - 1);
                    if cfg.stop_within_chunk {
                        break;
                    }
                }
            }
            if let Some(at) = first_violation {
                report.verdict = violation_verdict(&report, at, &spec, start)?;
                break 'rounds;
            }
        }
    }
    report.total_time = start.elapsed();
    if let ReportVerdict::NonAtomic { total_time, .. } = &mut report.verdict {
        *total_time = report.total_time;
    }
    Ok(report)
}

/// Builds the verdict for the record at `at`, re-deriving the atomic
/// outcomes from the harness text so the witness is checked independently
/// of the run that found it.
fn violation_verdict(
    report: &CheckReport,
    at: usize,
    spec: &SequentialSpec,
    start: Instant,
) -> Result<ReportVerdict, CheckError> {
    let rec = &report.records[at];
    let entry = rec
        .histogram
        .non_atomic()
        .max_by_key(|e| e.count)
        .expect("violating record");
    let h = parse_harness(&rec.harness).map_err(|e| CheckError::Config(e.to_string()))?;
    let set = atomic_outcomes(&h, spec)?;
    if is_atomic_outcome(&entry.outcome, &set) {
        return Err(CheckError::Revalidation {
            harness: rec.harness.clone(),
            outcome: entry.outcome.to_string(),
        });
    }
    Ok(ReportVerdict::NonAtomic {
        params: rec.params,
        harness: rec.harness.clone(),
        outcome: entry.outcome.clone(),
        frequency: entry.count,
        trials: rec.histogram.total,
        harnesses_tested: report.harnesses_tested,
        round_tested: report
            .records
            .iter()
            .filter(|r| r.params == rec.params)
            .count(),
        round_total: rec.round_total,
        total_time: start.elapsed(),
    })
}
