//! Concurrent execution of one harness against an object under test.
//!
//! Trials run in batches: each sequence of the harness gets its own thread,
//! and the threads walk through a batch of fresh instances together. Before
//! instance `i`, every thread waits at an arrival barrier until all threads
//! have reached `i`, so the sequences start on the same instance at the same
//! time; a sequence with happens-before predecessors additionally waits until
//! those have finished instance `i`. Each thread writes only its own result
//! buffer; the coordinator assembles outcomes after the batch.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use atomicity_core::lincheck::{is_linearizable, LincheckError};
use atomicity_core::{
    atomic_outcomes, AtomicOutcomeSet, Harness, History, Invocation, Outcome, SequentialSpec,
    SpecError, Value,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sut::{ConcurrentObject, SutAdapter};

#[derive(Debug, Error)]
pub enum StressError {
    #[error("stress budget must allow at least one trial and one worker")]
    ZeroBudget,
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Lincheck(#[from] LincheckError),
    #[error("trial timed out after {after:?}: sequences {stuck:?} did not finish (possible deadlock in the object under test)")]
    Timeout { after: Duration, stuck: Vec<usize> },
    #[error("a harness thread panicked outside the object under test")]
    WorkerPanic,
}

/// Sequence-level scheduling derived from the harness happens-before.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePlan {
    /// Antichains in happens-before order: phase `k` holds the sequences
    /// whose longest chain of predecessors has length `k`.
    pub phases: Vec<Vec<usize>>,
    /// Happens-before predecessors of each sequence (transitively closed).
    pub preds: Vec<Vec<usize>>,
}

impl PhasePlan {
    pub fn new(h: &Harness) -> Self {
        let n = h.num_sequences();
        let order = h.order();
        let preds: Vec<Vec<usize>> = (0..n)
            .map(|j| (0..n).filter(|&i| order.lt(i, j)).collect())
            .collect();
        let mut depth = vec![0usize; n];
        // predecessors have strictly fewer predecessors, so sorting by that
        // count is a topological order
        let mut topo: Vec<usize> = (0..n).collect();
        topo.sort_by_key(|&j| preds[j].len());
        for &j in &topo {
            depth[j] = preds[j].iter().map(|&i| depth[i] + 1).max().unwrap_or(0);
        }
        let mut phases = vec![Vec::new(); depth.iter().max().map_or(0, |d| d + 1)];
        for (j, &d) in depth.iter().enumerate() {
            phases[d].push(j);
        }
        PhasePlan { phases, preds }
    }
}

/// Limits for one stress run; at least one of `time` and `trials` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StressBudget {
    pub time: Option<Duration>,
    pub trials: Option<u64>,
    /// Independent groups of harness threads running at once.
    pub workers: usize,
}

impl StressBudget {
    pub fn time(d: Duration) -> Self {
        StressBudget {
            time: Some(d),
            trials: None,
            workers: 1,
        }
    }

    pub fn trials(n: u64) -> Self {
        StressBudget {
            time: None,
            trials: Some(n),
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

impl Default for StressBudget {
    fn default() -> Self {
        Self::time(Duration::from_secs(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StressOptions {
    /// Stop at the end of the first batch that shows a non-atomic outcome.
    pub fail_fast: bool,
    /// Record invocation timestamps and check each history's linearizability.
    pub validate: bool,
    /// A batch that makes no progress for this long is abandoned.
    pub trial_timeout: Duration,
    pub max_batch: usize,
}

impl Default for StressOptions {
    fn default() -> Self {
        StressOptions {
            fail_fast: false,
            validate: false,
            trial_timeout: Duration::from_secs(10),
            max_batch: 8192,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub outcome: Outcome,
    pub atomic: bool,
    pub count: u64,
}

/// Observed outcomes with frequencies; counts sum to `total`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeHistogram {
    /// Sorted by outcome.
    pub entries: Vec<HistogramEntry>,
    pub total: u64,
    pub elapsed: Duration,
}

impl OutcomeHistogram {
    fn new(counts: HashMap<Outcome, u64>, set: &AtomicOutcomeSet, elapsed: Duration) -> Self {
        let mut entries: Vec<HistogramEntry> = counts
            .into_iter()
            .map(|(outcome, count)| HistogramEntry {
                atomic: set.contains(&outcome),
                outcome,
                count,
            })
            .collect();
        entries.sort_by(|a, b| a.outcome.cmp(&b.outcome));
        OutcomeHistogram {
            total: entries.iter().map(|e| e.count).sum(),
            entries,
            elapsed,
        }
    }

    pub fn non_atomic(&self) -> impl Iterator<Item = &HistogramEntry> {
        self.entries.iter().filter(|e| !e.atomic)
    }

    pub fn trials_per_second(&self) -> f64 {
        self.total as f64 / self.elapsed.as_secs_f64().max(1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// The most frequent non-atomic outcome.
    Violation {
        outcome: Outcome,
        count: u64,
    },
    AtomicSoFar,
}

/// Linearizability results over the recorded histories of a validating run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub histories: u64,
    pub linearizable: u64,
    /// Linearizable histories whose outcome is not atomic; always zero
    /// unless the oracle is wrong.
    pub linearizable_non_atomic: u64,
    /// Distinct (outcome, order) pairs checked.
    pub distinct: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressResult {
    pub histogram: OutcomeHistogram,
    pub verdict: Verdict,
    pub validation: Option<ValidationSummary>,
    pub workers: usize,
}

impl StressResult {
    pub fn trials_per_second_per_worker(&self) -> f64 {
        self.histogram.trials_per_second() / self.workers.max(1) as f64
    }
}

/// The harness prepared for execution.
struct Prepared {
    seqs: Vec<Vec<Invocation>>,
    preds: Vec<Vec<usize>>,
}

impl Prepared {
    fn new(h: &Harness) -> Self {
        Prepared {
            seqs: h.sequences().to_vec(),
            preds: PhasePlan::new(h).preds,
        }
    }

    fn slots(&self) -> usize {
        self.seqs.iter().map(Vec::len).sum()
    }
}

struct Shared {
    arrived: Vec<AtomicUsize>,
    done: Vec<AtomicUsize>,
    abort: AtomicBool,
}

/// Start and return instants of every invocation of one sequence.
type Stamps = Vec<(Instant, Instant)>;

struct BatchOutput {
    /// Per sequence: `instances * len` return values.
    values: Vec<Vec<Value>>,
    stamps: Option<Vec<Stamps>>,
    instances: usize,
}

fn multi_core() -> bool {
    thread::available_parallelism().map_or(false, |n| n.get() > 1)
}

/// Spins briefly on multi-core machines, otherwise yields; gives up when
/// `abort` is raised.
fn wait_until(cond: impl Fn() -> bool, abort: &AtomicBool, spin: bool) -> bool {
    let mut spins = 0u32;
    loop {
        if cond() {
            return true;
        }
        if abort.load(Ordering::Relaxed) {
            return false;
        }
        if spin && spins < 128 {
            spins += 1;
            std::hint::spin_loop();
        } else {
            thread::yield_now();
        }
    }
}

fn run_batch(
    prep: &Arc<Prepared>,
    sut: &SutAdapter,
    instances: usize,
    record: bool,
    timeout: Duration,
) -> Result<BatchOutput, StressError> {
    let n = prep.seqs.len();
    let objs: Arc<Vec<Arc<dyn ConcurrentObject>>> =
        Arc::new((0..instances).map(|_| sut.fresh()).collect());
    let shared = Arc::new(Shared {
        arrived: (0..n).map(|_| AtomicUsize::new(0)).collect(),
        done: (0..n).map(|_| AtomicUsize::new(0)).collect(),
        abort: AtomicBool::new(false),
    });
    let spin = multi_core();
    let (tx, rx) = mpsc::channel();
    let mut handles = Vec::with_capacity(n);
    for s in 0..n {
        let (prep, objs, shared, tx) = (
            Arc::clone(prep),
            Arc::clone(&objs),
            Arc::clone(&shared),
            tx.clone(),
        );
        handles.push(thread::spawn(move || {
            let seq = &prep.seqs[s];
            let mut values = Vec::with_capacity(instances * seq.len());
            let mut stamps = if record {
                Vec::with_capacity(instances * seq.len())
            } else {
                Vec::new()
            };
            for (i, obj) in objs.iter().enumerate() {
                shared.arrived[s].store(i + 1, Ordering::Release);
                let ready = || {
                    shared.arrived.iter().all(|a| a.load(Ordering::Acquire) > i)
                        && prep.preds[s]
                            .iter()
                            .all(|&p| shared.done[p].load(Ordering::Acquire) > i)
                };
                if !wait_until(ready, &shared.abort, spin) {
                    return;
                }
                for inv in seq {
                    if record {
                        let start = Instant::now();
                        values.push(SutAdapter::invoke(obj.as_ref(), inv));
                        stamps.push((start, Instant::now()));
                    } else {
                        values.push(SutAdapter::invoke(obj.as_ref(), inv));
                    }
                }
                shared.done[s].store(i + 1, Ordering::Release);
            }
            let _ = tx.send((s, values, stamps));
        }));
    }
    drop(tx);
    let mut values = vec![Vec::new(); n];
    let mut stamps = vec![Vec::new(); n];
    let mut received = 0;
    let mut last_progress = (Instant::now(), 0usize);
    while received < n {
        match rx.recv_timeout(Duration::from_millis(50)) {
            Ok((s, v, t)) => {
                values[s] = v;
                stamps[s] = t;
                received += 1;
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                let progress: usize = shared.done.iter().map(|d| d.load(Ordering::Relaxed)).sum();
                if progress != last_progress.1 {
                    last_progress = (Instant::now(), progress);
                } else if last_progress.0.elapsed() > timeout {
                    shared.abort.store(true, Ordering::Relaxed);
                    let finished = shared
                        .done
                        .iter()
                        .map(|d| d.load(Ordering::Relaxed))
                        .min()
                        .unwrap_or(0);
                    let stuck = (0..n)
                        .filter(|&s| shared.done[s].load(Ordering::Relaxed) <= finished)
                        .collect();
                    // threads blocked inside the object are left behind
                    return Err(StressError::Timeout {
                        after: timeout,
                        stuck,
                    });
                }
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => return Err(StressError::WorkerPanic),
        }
    }
    for h in handles {
        h.join().map_err(|_| StressError::WorkerPanic)?;
    }
    Ok(BatchOutput {
        values,
        stamps: record.then_some(stamps),
        instances,
    })
}

impl BatchOutput {
    fn outcome_into(&self, prep: &Prepared, i: usize, out: &mut Vec<Value>) {
        out.clear();
        for (s, seq) in prep.seqs.iter().enumerate() {
            out.extend_from_slice(&self.values[s][i * seq.len()..(i + 1) * seq.len()]);
        }
    }

    /// Happens-before of instance `i`: `a < b` iff `a` returned before `b`
    /// started, together with the order the harness itself enforces.
    fn history_pairs(
        &self,
        prep: &Prepared,
        i: usize,
        harness_pairs: &[(usize, usize)],
    ) -> Vec<(usize, usize)> {
        let stamps = self.stamps.as_ref().expect("recorded batch");
        let mut times = Vec::with_capacity(prep.slots());
        for (s, seq) in prep.seqs.iter().enumerate() {
            times.extend_from_slice(&stamps[s][i * seq.len()..(i + 1) * seq.len()]);
        }
        let mut pairs = harness_pairs.to_vec();
        for (a, ta) in times.iter().enumerate() {
            for (b, tb) in times.iter().enumerate() {
                if ta.1 < tb.0 {
                    pairs.push((a, b));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

/// Runs the harness once on a fresh instance.
pub fn run_trial(h: &Harness, sut: &SutAdapter) -> Result<Outcome, StressError> {
    let prep = Arc::new(Prepared::new(h));
    let out = run_batch(&prep, sut, 1, false, StressOptions::default().trial_timeout)?;
    let mut slots = Vec::new();
    out.outcome_into(&prep, 0, &mut slots);
    Ok(Outcome(slots))
}

/// Runs the harness once with timestamps and returns the resulting history.
pub fn record_history_trial(h: &Harness, sut: &SutAdapter) -> Result<History, StressError> {
    let prep = Arc::new(Prepared::new(h));
    let out = run_batch(&prep, sut, 1, true, StressOptions::default().trial_timeout)?;
    let mut slots = Vec::new();
    out.outcome_into(&prep, 0, &mut slots);
    let pairs = out.history_pairs(&prep, 0, &h.invocation_order().pairs());
    Ok(History::new(h.clone(), Outcome(slots), &pairs)
        .expect("real-time order extends the harness order"))
}

struct Group<'a> {
    h: &'a Harness,
    prep: Arc<Prepared>,
    sut: &'a SutAdapter,
    spec: &'a SequentialSpec,
    set: &'a AtomicOutcomeSet,
    budget: StressBudget,
    opts: StressOptions,
    start: Instant,
    reserved: &'a AtomicU64,
    stop: &'a AtomicBool,
}

struct GroupResult {
    counts: HashMap<Outcome, u64>,
    validation: ValidationSummary,
}

impl Group<'_> {
    fn run(&self) -> Result<GroupResult, StressError> {
        let mut counts: HashMap<Outcome, u64> = HashMap::new();
        let mut validation = ValidationSummary::default();
        let mut lin_cache: HashMap<(Outcome, Vec<(usize, usize)>), bool> = HashMap::new();
        let harness_pairs = self.h.invocation_order().pairs();
        let mut batch = 64usize;
        let mut scratch = Vec::with_capacity(self.prep.slots());
        while !self.stop.load(Ordering::Relaxed) {
            let mut size = batch;
            if let Some(limit) = self.budget.trials {
                let taken = self.reserved.fetch_add(size as u64, Ordering::Relaxed);
                if taken >= limit {
                    break;
                }
                size = size.min((limit - taken) as usize);
            }
            let t0 = Instant::now();
            let out = run_batch(
                &self.prep,
                self.sut,
                size,
                self.opts.validate,
                self.opts.trial_timeout,
            )?;
            let mut violated = false;
            for i in 0..out.instances {
                out.outcome_into(&self.prep, i, &mut scratch);
                match counts.get_mut(scratch.as_slice()) {
                    Some(c) => *c += 1,
                    None => {
                        violated |= !self.set.contains(&Outcome(scratch.clone()));
                        counts.insert(Outcome(scratch.clone()), 1);
                    }
                }
                if self.opts.validate {
                    let pairs = out.history_pairs(&self.prep, i, &harness_pairs);
                    let key = (Outcome(scratch.clone()), pairs);
                    let lin = match lin_cache.get(&key) {
                        Some(&l) => l,
                        None => {
                            let hist = History::new(self.h.clone(), key.0.clone(), &key.1)
                                .expect("real-time order extends the harness order");
                            let l = is_linearizable(&hist, self.spec)?;
                            lin_cache.insert(key.clone(), l);
                            validation.distinct += 1;
                            l
                        }
                    };
                    validation.histories += 1;
                    if lin {
                        validation.linearizable += 1;
                        if !self.set.contains(&key.0) {
                            validation.linearizable_non_atomic += 1;
                        }
                    }
                }
            }
            if violated && self.opts.fail_fast {
                self.stop.store(true, Ordering::Relaxed);
            }
            if let Some(limit) = self.budget.time {
                let elapsed = self.start.elapsed();
                if elapsed >= limit {
                    break;
                }
                // grow batches while several more fit in the remaining time
                if t0.elapsed() * 8 < limit - elapsed {
                    batch = (batch * 2).min(self.opts.max_batch);
                } else {
                    batch = (batch / 2).max(1);
                }
            } else {
                batch = (batch * 2).min(self.opts.max_batch);
            }
        }
        Ok(GroupResult { counts, validation })
    }
}

/// Stress-tests `h` on `sut` until the budget runs out (or, with
/// `fail_fast`, until a non-atomic outcome shows up), classifying every
/// observed outcome against the atomic outcomes of `h` under `spec`.
pub fn stress(
    h: &Harness,
    sut: &SutAdapter,
    spec: &SequentialSpec,
    budget: StressBudget,
    opts: StressOptions,
) -> Result<StressResult, StressError> {
    if budget.workers == 0
        || (budget.time.is_none() && budget.trials.is_none())
        || budget.trials == Some(0)
        || budget.time == Some(Duration::ZERO)
    {
        return Err(StressError::ZeroBudget);
    }
    let set = atomic_outcomes(h, spec)?;
    stress_with(h, &set, sut, spec, budget, opts)
}

/// As [`stress`], with the atomic outcomes already computed.
pub fn stress_with(
    h: &Harness,
    set: &AtomicOutcomeSet,
    sut: &SutAdapter,
    spec: &SequentialSpec,
    budget: StressBudget,
    opts: StressOptions,
) -> Result<StressResult, StressError> {
    if budget.workers == 0 || (budget.time.is_none() && budget.trials.is_none()) {
        return Err(StressError::ZeroBudget);
    }
    let start = Instant::now();
    let reserved = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let prep = Arc::new(Prepared::new(h));
    let results: Vec<Result<GroupResult, StressError>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..budget.workers)
            .map(|_| {
                let group = Group {
                    h,
                    prep: Arc::clone(&prep),
                    sut,
                    spec,
                    set,
                    budget,
                    opts,
                    start,
                    reserved: &reserved,
                    stop: &stop,
                };
                scope.spawn(move || group.run())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or(Err(StressError::WorkerPanic)))
            .collect()
    });
    let elapsed = start.elapsed();
    let mut counts: HashMap<Outcome, u64> = HashMap::new();
    let mut validation = ValidationSummary::default();
    for r in results {
        let r = r?;
        for (o, c) in r.counts {
            *counts.entry(o).or_default() += c;
        }
        validation.histories += r.validation.histories;
        validation.linearizable += r.validation.linearizable;
        validation.linearizable_non_atomic += r.validation.linearizable_non_atomic;
        validation.distinct += r.validation.distinct;
    }
    let histogram = OutcomeHistogram::new(counts, set, elapsed);
    let verdict =
        histogram
            .non_atomic()
            .max_by_key(|e| e.count)
            .map_or(Verdict::AtomicSoFar, |e| Verdict::Violation {
                outcome: e.outcome.clone(),
                count: e.count,
            });
    Ok(StressResult {
        histogram,
        verdict,
        validation: opts.validate.then_some(validation),
        workers: budget.workers,
    })
}
