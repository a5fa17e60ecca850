//! Reference objects: each method body runs entirely inside one
//! object-wide critical section, so every method is atomic.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use atomicity_core::{Invocation, Value};
use parking_lot::Mutex;

use super::args::{entries, int, ints, list, opt};
use super::ConcurrentObject;

#[derive(Default)]
pub struct LockedMap(pub(super) Mutex<BTreeMap<i64, i64>>);

impl LockedMap {
    fn call(&self, inv: &Invocation) -> Option<Value> {
        map_call(&mut self.0.lock(), inv)
    }
}

pub(super) fn map_call(m: &mut BTreeMap<i64, i64>, inv: &Invocation) -> Option<Value> {
    let a = &inv.args;
    Some(match inv.method.as_str() {
        "put" => opt(m.insert(int(a, 0)?, int(a, 1)?)),
        "get" => opt(m.get(&int(a, 0)?).copied()),
        "remove" => opt(m.remove(&int(a, 0)?)),
        "containsKey" => Value::Bool(m.contains_key(&int(a, 0)?)),
        "containsValue" => {
            let v = int(a, 0)?;
            Value::Bool(m.values().any(|&x| x == v))
        }
        "clear" => {
            m.clear();
            Value::Unit
        }
        "putAll" => {
            m.extend(entries(a, 0)?);
            Value::Unit
        }
        "size" => Value::Int(m.len() as i64),
        "isEmpty" => Value::Bool(m.is_empty()),
        _ => return None,
    })
}

impl ConcurrentObject for LockedMap {
    fn invoke(&self, inv: &Invocation) -> Value {
        self.call(inv).unwrap_or(Value::Exception)
    }
}

/// Serves both the FIFO queue and the deque method sets.
#[derive(Default)]
pub struct LockedQueue(pub(super) Mutex<VecDeque<i64>>);

pub(super) fn queue_call(q: &mut VecDeque<i64>, inv: &Invocation) -> Option<Value> {
    let a = &inv.args;
    Some(match inv.method.as_str() {
        "offer" | "offerLast" => {
            q.push_back(int(a, 0)?);
            Value::Bool(true)
        }
        "offerFirst" => {
            q.push_front(int(a, 0)?);
            Value::Bool(true)
        }
        "poll" | "pollFirst" => opt(q.pop_front()),
        "pollLast" => opt(q.pop_back()),
        "peek" | "peekFirst" => opt(q.front().copied()),
        "peekLast" => opt(q.back().copied()),
        "clear" => {
            q.clear();
            Value::Unit
        }
        "addAll" => {
            let xs = ints(a, 0)?;
            q.extend(&xs);
            Value::Bool(!xs.is_empty())
        }
        "removeAll" => {
            let xs = ints(a, 0)?;
            let before = q.len();
            q.retain(|e| !xs.contains(e));
            Value::Bool(q.len() != before)
        }
        "contains" => Value::Bool(q.contains(&int(a, 0)?)),
        "containsAll" => {
            let xs = ints(a, 0)?;
            Value::Bool(xs.iter().all(|x| q.contains(x)))
        }
        "size" => Value::Int(q.len() as i64),
        "isEmpty" => Value::Bool(q.is_empty()),
        "toArray" => list(q.iter()),
        _ => return None,
    })
}

impl ConcurrentObject for LockedQueue {
    fn invoke(&self, inv: &Invocation) -> Value {
        queue_call(&mut self.0.lock(), inv).unwrap_or(Value::Exception)
    }
}

#[derive(Default)]
pub struct LockedSet(Mutex<BTreeSet<i64>>);

impl LockedSet {
    fn call(&self, inv: &Invocation) -> Option<Value> {
        let a = &inv.args;
        let mut s = self.0.lock();
        Some(match inv.method.as_str() {
            "add" => Value::Bool(s.insert(int(a, 0)?)),
            "remove" => Value::Bool(s.remove(&int(a, 0)?)),
            "contains" => Value::Bool(s.contains(&int(a, 0)?)),
            "clear" => {
                s.clear();
                Value::Unit
            }
            "size" => Value::Int(s.len() as i64),
            "isEmpty" => Value::Bool(s.is_empty()),
            "headSet" => list(s.range(..int(a, 0)?)),
            "subSet" => {
                let (lo, hi) = (int(a, 0)?, int(a, 1)?);
                if lo > hi {
                    Value::Exception
                } else {
                    list(s.range(lo..hi))
                }
            }
            _ => return None,
        })
    }
}

impl ConcurrentObject for LockedSet {
    fn invoke(&self, inv: &Invocation) -> Value {
        self.call(inv).unwrap_or(Value::Exception)
    }
}
