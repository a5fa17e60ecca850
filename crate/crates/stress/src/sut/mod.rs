//! Concurrent objects under test: coarse-locked reference implementations of
//! every family and seeded-bug variants with deliberately non-atomic methods.

mod args;
mod locked;
mod seeded;

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use atomicity_core::{Family, Invocation, SequentialSpec, Value};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

pub use seeded::WINDOW_MAX_YIELDS;

/// An object under test. `invoke` is called concurrently from several
/// threads on one instance; unknown methods and failures return
/// [`Value::Exception`].
pub trait ConcurrentObject: Send + Sync {
    fn invoke(&self, inv: &Invocation) -> Value;
}

pub type Factory = fn() -> Arc<dyn ConcurrentObject>;

/// A registered object under test.
#[derive(Clone, Serialize)]
pub struct SutAdapter {
    pub name: &'static str,
    pub family: Family,
    /// Whether every method is atomic by construction.
    pub expected_atomic: bool,
    /// The method with the seeded atomicity bug, if any.
    pub target: Option<&'static str>,
    pub description: &'static str,
    #[serde(skip)]
    factory: Factory,
}

impl fmt::Debug for SutAdapter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SutAdapter")
            .field("name", &self.name)
            .field("family", &self.family)
            .finish()
    }
}

impl SutAdapter {
    pub fn new(
        name: &'static str,
        family: Family,
        expected_atomic: bool,
        target: Option<&'static str>,
        description: &'static str,
        factory: Factory,
    ) -> Self {
        SutAdapter {
            name,
            family,
            expected_atomic,
            target,
            description,
            factory,
        }
    }

    /// A new, independent instance.
    pub fn fresh(&self) -> Arc<dyn ConcurrentObject> {
        (self.factory)()
    }

    /// Invokes on `obj`, folding panics into [`Value::Exception`].
    pub fn invoke(obj: &dyn ConcurrentObject, inv: &Invocation) -> Value {
        catch_unwind(AssertUnwindSafe(|| obj.invoke(inv))).unwrap_or(Value::Exception)
    }

    pub fn spec(&self) -> SequentialSpec {
        SequentialSpec::new(self.family)
    }
}

/// Name-indexed set of objects under test.
#[derive(Debug, Clone)]
pub struct SutRegistry {
    entries: Vec<SutAdapter>,
}

impl SutRegistry {
    pub fn get(&self, name: &str) -> Option<&SutAdapter> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SutAdapter> {
        self.entries.iter()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }
}

pub fn builtin_suts() -> SutRegistry {
    use Family::*;
    SutRegistry {
        entries: vec![
            SutAdapter::new(
                "locked-map",
                OrderedMap,
                true,
                None,
                "ordered map, every method under one mutex",
                || Arc::new(locked::LockedMap::default()),
            ),
            SutAdapter::new(
                "locked-queue",
                FifoQueue,
                true,
                None,
                "FIFO queue, every method under one mutex",
                || Arc::new(locked::LockedQueue::default()),
            ),
            SutAdapter::new(
                "locked-deque",
                Deque,
                true,
                None,
                "deque, every method under one mutex",
                || Arc::new(locked::LockedQueue::default()),
            ),
            SutAdapter::new(
                "locked-set",
                OrderedSet,
                true,
                None,
                "ordered set, every method under one mutex",
                || Arc::new(locked::LockedSet::default()),
            ),
            SutAdapter::new(
                "map-nonatomic-clear",
                OrderedMap,
                false,
                Some("clear"),
                "clear empties the entries, then resets the published size after a window",
                || Arc::new(seeded::PublishedMap::default()),
            ),
            SutAdapter::new(
                "map-nonatomic-size",
                OrderedMap,
                false,
                Some("size"),
                "striped map whose size sums the stripes one at a time",
                || Arc::new(seeded::StripedMap::default()),
            ),
            SutAdapter::new(
                "map-nonatomic-putall",
                OrderedMap,
                false,
                Some("putAll"),
                "putAll is a loop of independent puts",
                || Arc::new(seeded::LoopPutAllMap::default()),
            ),
            SutAdapter::new(
                "queue-nonatomic-containsall",
                FifoQueue,
                false,
                Some("containsAll"),
                "containsAll checks one element per lock acquisition",
                || Arc::new(seeded::PerElementQueue::default()),
            ),
            SutAdapter::new(
                "deque-nonatomic-pollLast",
                Deque,
                false,
                Some("pollLast"),
                "pollLast reads the tail index, then removes at that index under a second lock",
                || Arc::new(seeded::StaleTailDeque::default()),
            ),
        ],
    }
}

/// First sequential divergence between an object and its specification.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("after {} invocations, {last} returned {got} but the specification returns {expected}", .sequence.len())]
pub struct Divergence {
    /// Invocations preceding the diverging one; with `last` this is the
    /// shortest failing prefix of the random sequence.
    pub sequence: Vec<Invocation>,
    pub last: Invocation,
    pub expected: Value,
    pub got: Value,
}

/// Replays `trials` random single-threaded sequences of length `1..=max_len`
/// on fresh instances and on `spec`, comparing every return value.
pub fn sequential_conformance(
    make: &dyn Fn() -> Arc<dyn ConcurrentObject>,
    spec: &SequentialSpec,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<(), Divergence> {
    let invs: Vec<Invocation> = spec
        .methods
        .iter()
        .flat_map(|m| {
            atomicity_core::enumerate::method_invocations(spec, &m.name, 3)
                .expect("method from spec")
        })
        .collect();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..trials {
        let obj = make();
        let mut state = spec.new_state();
        let len = rng.random_range(1..=max_len);
        let mut prefix = Vec::with_capacity(len);
        for _ in 0..len {
            let inv = &invs[rng.random_range(0..invs.len())];
            let expected = spec.apply(&mut state, inv).expect("generated from spec");
            let got = SutAdapter::invoke(obj.as_ref(), inv);
            if got != expected {
                return Err(Divergence {
                    sequence: prefix,
                    last: inv.clone(),
                    expected,
                    got,
                });
            }
            prefix.push(inv.clone());
        }
    }
    Ok(())
}
