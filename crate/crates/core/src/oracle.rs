//! Precomputed atomic outcomes: every outcome some linearization of a
//! harness produces on the sequential specification.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::harness::Harness;
use crate::order::{count_linear_extensions, LinearExtensions};
use crate::outcome::Outcome;
use crate::spec::{SequentialSpec, SpecError, State};
use crate::value::{Invocation, Value};

/// Linearizations of `h`, each a sequence of invocation indices consistent
/// with program order and the lifted happens-before.
pub fn linearizations(h: &Harness) -> LinearExtensions {
    LinearExtensions::new(h.invocation_order().predecessors())
}

pub fn count_linearizations(h: &Harness) -> u128 {
    count_linear_extensions(&h.invocation_order().predecessors())
}

/// The set of outcomes produced by linearized executions of one harness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomicOutcomeSet {
    pub harness: Harness,
    /// Sorted, deduplicated.
    outcomes: Vec<Outcome>,
    #[serde(skip)]
    keys: HashSet<Vec<u8>>,
}

impl AtomicOutcomeSet {
    fn from_outcomes(harness: Harness, mut outcomes: Vec<Outcome>) -> Self {
        outcomes.sort();
        outcomes.dedup();
        let keys = outcomes.iter().map(Outcome::encode).collect();
        AtomicOutcomeSet {
            harness,
            outcomes,
            keys,
        }
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn contains(&self, o: &Outcome) -> bool {
        if self.keys.is_empty() && !self.outcomes.is_empty() {
            // deserialized without the key index
            return self.outcomes.binary_search(o).is_ok();
        }
        self.keys.contains(&o.encode())
    }
}

/// Executes every linearization of `h` from the initial state and collects
/// the distinct outcomes.
pub fn atomic_outcomes(h: &Harness, spec: &SequentialSpec) -> Result<AtomicOutcomeSet, SpecError> {
    h.invocations()
        .try_for_each(|inv| spec.validate(inv).map(drop))?;
    let invs: Vec<&Invocation> = h.invocations().collect();
    let pred = h.invocation_order().predecessors();
    let mut found = HashSet::new();
    let mut slots = vec![Value::Unit; invs.len()];
    explore(
        spec,
        &invs,
        &pred,
        0,
        spec.new_state(),
        &mut slots,
        &mut found,
    )?;
    Ok(AtomicOutcomeSet::from_outcomes(
        h.clone(),
        found.into_iter().collect(),
    ))
}

fn explore(
    spec: &SequentialSpec,
    invs: &[&Invocation],
    pred: &[u64],
    placed: u64,
    state: State,
    slots: &mut Vec<Value>,
    found: &mut HashSet<Outcome>,
) -> Result<(), SpecError> {
    let n = invs.len();
    if placed.count_ones() as usize == n {
        found.insert(Outcome(slots.clone()));
        return Ok(());
    }
    let ready: Vec<usize> = (0..n)
        .filter(|&i| placed & (1 << i) == 0 && pred[i] & !placed == 0)
        .collect();
    let last = ready.len() - 1;
    let mut state = Some(state);
    for (k, i) in ready.into_iter().enumerate() {
        // the last branch may consume the state instead of cloning it
        let mut s = if k == last {
            state.take().unwrap()
        } else {
            state.clone().unwrap()
        };
        slots[i] = spec.apply(&mut s, invs[i])?;
        explore(spec, invs, pred, placed | (1 << i), s, slots, found)?;
    }
    Ok(())
}

pub fn is_atomic_outcome(o: &Outcome, set: &AtomicOutcomeSet) -> bool {
    set.contains(o)
}

/// Every linearization with the outcome it produces, in enumeration order.
pub fn serializations(
    h: &Harness,
    spec: &SequentialSpec,
) -> Result<Vec<(Vec<usize>, Outcome)>, SpecError> {
    let invs: Vec<&Invocation> = h.invocations().collect();
    linearizations(h)
        .map(|order| {
            let mut state = spec.new_state();
            let mut slots = vec![Value::Unit; invs.len()];
            for &i in &order {
                slots[i] = spec.apply(&mut state, invs[i])?;
            }
            Ok((order, Outcome(slots)))
        })
        .collect()
}
