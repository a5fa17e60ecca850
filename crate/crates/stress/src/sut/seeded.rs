//! Objects whose core methods are atomic but with one deliberately
//! non-atomic method each. Every bug is invisible sequentially; between
//! its sub-steps the method passes through a window that yields the
//! processor a random number of times (at most [`WINDOW_MAX_YIELDS`]), so
//! the bad interleavings show up even on a single core.

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};

use atomicity_core::{Invocation, Value};
use parking_lot::Mutex;
use rand::Rng;

use super::args::{entries, int, ints, opt};
use super::locked::{map_call, queue_call, LockedMap, LockedQueue};
use super::ConcurrentObject;

/// Upper bound on processor yields in one bug window.
pub const WINDOW_MAX_YIELDS: u32 = 2;

fn window() {
    let n = rand::rng().random_range(0..=WINDOW_MAX_YIELDS);
    for _ in 0..n {
        std::thread::yield_now();
    }
}

/// Sorted entries plus a separately published count of visible entries.
/// `clear` empties the entries and only later resets the count, so a put
/// landing in between leaves an entry that readers never see again.
#[derive(Default)]
pub struct PublishedMap {
    entries: Mutex<Vec<(i64, i64)>>,
    published: AtomicUsize,
}

impl PublishedMap {
    fn visible<'a>(&self, entries: &'a [(i64, i64)]) -> &'a [(i64, i64)] {
        &entries[..self.published.load(Ordering::Acquire).min(entries.len())]
    }

    fn find(entries: &[(i64, i64)], k: i64) -> Result<usize, usize> {
        entries.binary_search_by_key(&k, |e| e.0)
    }

    fn insert(&self, entries: &mut Vec<(i64, i64)>, k: i64, v: i64) -> Option<i64> {
        match Self::find(entries, k) {
            Ok(i) => Some(std::mem::replace(&mut entries[i].1, v)),
            Err(i) => {
                entries.insert(i, (k, v));
                self.published.fetch_add(1, Ordering::Release);
                None
            }
        }
    }

    fn call(&self, inv: &Invocation) -> Option<Value> {
        let a = &inv.args;
        if inv.method == "clear" {
            self.entries.lock().clear();
            window();
            self.published.store(0, Ordering::Release);
            return Some(Value::Unit);
        }
        let mut e = self.entries.lock();
        Some(match inv.method.as_str() {
            "put" => opt(self.insert(&mut e, int(a, 0)?, int(a, 1)?)),
            "putAll" => {
                for (k, v) in entries(a, 0)? {
                    self.insert(&mut e, k, v);
                }
                Value::Unit
            }
            "remove" => match Self::find(&e, int(a, 0)?) {
                Ok(i) => {
                    let (_, v) = e.remove(i);
                    let p = self.published.load(Ordering::Acquire);
                    self.published.store(p.saturating_sub(1), Ordering::Release);
                    Value::Int(v)
                }
                Err(_) => Value::Null,
            },
            "get" => opt(Self::find(self.visible(&e), int(a, 0)?)
                .ok()
                .map(|i| e[i].1)),
            "containsKey" => Value::Bool(Self::find(self.visible(&e), int(a, 0)?).is_ok()),
            "containsValue" => {
                let v = int(a, 0)?;
                Value::Bool(self.visible(&e).iter().any(|x| x.1 == v))
            }
            "size" => Value::Int(self.visible(&e).len() as i64),
            "isEmpty" => Value::Bool(self.visible(&e).is_empty()),
            _ => return None,
        })
    }
}

impl ConcurrentObject for PublishedMap {
    fn invoke(&self, inv: &Invocation) -> Value {
        self.call(inv).unwrap_or(Value::Exception)
    }
}

const STRIPES: usize = 4;

/// Keys spread over independently locked stripes; `size`, `isEmpty` and
/// `containsValue` visit the stripes one at a time.
#[derive(Default)]
pub struct StripedMap {
    stripes: [Mutex<BTreeMap<i64, i64>>; STRIPES],
}

impl StripedMap {
    fn stripe(&self, k: i64) -> &Mutex<BTreeMap<i64, i64>> {
        &self.stripes[k.rem_euclid(STRIPES as i64) as usize]
    }

    fn call(&self, inv: &Invocation) -> Option<Value> {
        let a = &inv.args;
        Some(match inv.method.as_str() {
            "put" | "get" | "remove" | "containsKey" => {
                map_call(&mut self.stripe(int(a, 0)?).lock(), inv)?
            }
            "size" => {
                let mut total = 0;
                for (i, s) in self.stripes.iter().enumerate() {
                    if i > 0 {
                        window();
                    }
                    total += s.lock().len();
                }
                Value::Int(total as i64)
            }
            "isEmpty" => {
                let mut empty = true;
                for s in &self.stripes {
                    empty &= s.lock().is_empty();
                    window();
                }
                Value::Bool(empty)
            }
            "containsValue" => {
                let v = int(a, 0)?;
                let mut found = false;
                for s in &self.stripes {
                    found |= s.lock().values().any(|&x| x == v);
                    window();
                }
                Value::Bool(found)
            }
            "clear" | "putAll" => {
                // take every stripe in index order: atomic
                let mut guards: Vec<_> = self.stripes.iter().map(|s| s.lock()).collect();
                if inv.method == "clear" {
                    guards.iter_mut().for_each(|g| g.clear());
                } else {
                    for (k, v) in entries(a, 0)? {
                        guards[k.rem_euclid(STRIPES as i64) as usize].insert(k, v);
                    }
                }
                Value::Unit
            }
            _ => return None,
        })
    }
}

impl ConcurrentObject for StripedMap {
    fn invoke(&self, inv: &Invocation) -> Value {
        self.call(inv).unwrap_or(Value::Exception)
    }
}

/// A locked map whose `putAll` inserts entry by entry.
#[derive(Default)]
pub struct LoopPutAllMap(LockedMap);

impl ConcurrentObject for LoopPutAllMap {
    fn invoke(&self, inv: &Invocation) -> Value {
        if inv.method != "putAll" {
            return self.0.invoke(inv);
        }
        let Some(es) = entries(&inv.args, 0) else {
            return Value::Exception;
        };
        for (i, (k, v)) in es.into_iter().enumerate() {
            if i > 0 {
                window();
            }
            self.0 .0.lock().insert(k, v);
        }
        Value::Unit
    }
}

/// A locked queue whose `containsAll` takes the lock once per element.
#[derive(Default)]
pub struct PerElementQueue(LockedQueue);

impl ConcurrentObject for PerElementQueue {
    fn invoke(&self, inv: &Invocation) -> Value {
        if inv.method != "containsAll" {
            return self.0.invoke(inv);
        }
        let Some(xs) = ints(&inv.args, 0) else {
            return Value::Exception;
        };
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                window();
            }
            if !self.0 .0.lock().contains(x) {
                return Value::Bool(false);
            }
        }
        Value::Bool(true)
    }
}

/// A locked deque whose `pollLast` computes the tail index under one lock
/// acquisition and removes at that index under another.
#[derive(Default)]
pub struct StaleTailDeque(Mutex<VecDeque<i64>>);

impl ConcurrentObject for StaleTailDeque {
    fn invoke(&self, inv: &Invocation) -> Value {
        if inv.method != "pollLast" {
            return queue_call(&mut self.0.lock(), inv).unwrap_or(Value::Exception);
        }
        let tail = match self.0.lock().len() {
            0 => return Value::Null,
            n => n - 1,
        };
        window();
        opt(self.0.lock().remove(tail))
    }
}
