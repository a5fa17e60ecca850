//! Brute-force history linearizability, used as an independent cross-check
//! of the outcome oracle. Exponential; guarded to small histories.

use std::collections::HashSet;

use thiserror::Error;

use crate::harness::{Harness, HarnessError, History};
use crate::order::Order;
use crate::outcome::Outcome;
use crate::spec::{SequentialSpec, SpecError, State};
use crate::value::Invocation;

/// Largest number of invocations the checker accepts.
pub const MAX_INVOCATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LincheckError {
    #[error(
        "history has {0} invocations; the exhaustive checker accepts at most {MAX_INVOCATIONS}"
    )]
    TooLarge(usize),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

/// Whether some total order extending `hist`'s happens-before, replayed on
/// `spec`, reproduces the recorded outcome exactly.
pub fn is_linearizable(hist: &History, spec: &SequentialSpec) -> Result<bool, LincheckError> {
    check(&hist.harness, &hist.outcome, hist.hb(), spec)
}

/// Linearizability of the weakest history of `h` with outcome `o`: only the
/// order the harness imposes. Agrees with membership in the atomic outcome
/// set by definition.
pub fn harness_linearizable_outcome(
    h: &Harness,
    o: &Outcome,
    spec: &SequentialSpec,
) -> Result<bool, LincheckError> {
    if o.len() != h.num_invocations() {
        return Err(HarnessError::OutcomeLength {
            expected: h.num_invocations(),
            got: o.len(),
        }
        .into());
    }
    check(h, o, &h.invocation_order(), spec)
}

fn check(
    h: &Harness,
    o: &Outcome,
    hb: &Order,
    spec: &SequentialSpec,
) -> Result<bool, LincheckError> {
    let n = h.num_invocations();
    if n > MAX_INVOCATIONS {
        return Err(LincheckError::TooLarge(n));
    }
    let invs: Vec<&Invocation> = h.invocations().collect();
    for inv in &invs {
        spec.validate(inv)?;
    }
    let mut search = Search {
        spec,
        invs: &invs,
        pred: hb.predecessors(),
        expected: o,
        dead: HashSet::new(),
    };
    search.run(0, spec.new_state())
}

struct Search<'a> {
    spec: &'a SequentialSpec,
    invs: &'a [&'a Invocation],
    pred: Vec<u64>,
    expected: &'a Outcome,
    // (placed set, state) pairs from which no witness exists
    dead: HashSet<(u64, State)>,
}

impl Search<'_> {
    fn run(&mut self, placed: u64, state: State) -> Result<bool, LincheckError> {
        let n = self.invs.len();
        if placed.count_ones() as usize == n {
            return Ok(true);
        }
        if self.dead.contains(&(placed, state.clone())) {
            return Ok(false);
        }
        for i in 0..n {
            if placed & (1 << i) != 0 || self.pred[i] & !placed != 0 {
                continue;
            }
            let mut next = state.clone();
            let ret = self.spec.apply(&mut next, self.invs[i])?;
            if ret == self.expected.0[i] && self.run(placed | (1 << i), next)? {
                return Ok(true);
            }
        }
        self.dead.insert((placed, state));
        Ok(false)
    }
}
