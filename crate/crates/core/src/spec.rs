//! Deterministic sequential specifications of the collection families under
//! test, with per-method metadata.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{Invocation, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "map")]
    OrderedMap,
    #[serde(rename = "queue")]
    FifoQueue,
    #[serde(rename = "deque")]
    Deque,
    #[serde(rename = "set")]
    OrderedSet,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::OrderedMap,
        Family::FifoQueue,
        Family::Deque,
        Family::OrderedSet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::OrderedMap => "map",
            Family::FifoQueue => "queue",
            Family::Deque => "deque",
            Family::OrderedSet => "set",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "map" | "orderedmap" => Ok(Family::OrderedMap),
            "queue" | "fifoqueue" => Ok(Family::FifoQueue),
            "deque" => Ok(Family::Deque),
            "set" | "orderedset" => Ok(Family::OrderedSet),
            _ => Err(SpecError::UnknownFamily(s.to_string())),
        }
    }
}

/// Kind of a single method argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArgKind {
    ScalarValue,
    KeyScalar,
    ValueScalar,
    /// A size-2 collection of scalars; repeats allowed.
    ValueCollection,
    /// A size-2 map with distinct keys.
    KeyValueCollection,
}

impl ArgKind {
    pub fn is_scalar(self) -> bool {
        matches!(
            self,
            ArgKind::ScalarValue | ArgKind::KeyScalar | ArgKind::ValueScalar
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReturnKind {
    Unit,
    Bool,
    Int,
    /// An element/value, or `null` when absent.
    Nullable,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mutability {
    ReadOnly,
    Update,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    pub arg_kinds: Vec<ArgKind>,
    pub returns: ReturnKind,
    pub mutability: Mutability,
    pub core: bool,
}

/// A user-supplied change to method metadata.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodOverride {
    pub name: String,
    #[serde(default)]
    pub mutability: Option<Mutability>,
    #[serde(default)]
    pub core: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("unknown family `{0}` (expected map, queue, deque or set)")]
    UnknownFamily(String),
    #[error("method `{method}` is not part of the {family} specification")]
    UnknownMethod { family: Family, method: String },
    #[error("`{method}` takes {expected} argument(s), got {got}")]
    Arity {
        method: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {index} of `{method}` must be a {expected:?}, got `{got}`")]
    ArgKind {
        method: String,
        index: usize,
        expected: ArgKind,
        got: String,
    },
}

/// Abstract state of a collection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum State {
    Map(BTreeMap<i64, i64>),
    Queue(VecDeque<i64>),
    Set(BTreeSet<i64>),
}

/// A deterministic state machine over one collection family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequentialSpec {
    pub family: Family,
    pub methods: Vec<MethodSpec>,
}

use ArgKind::*;
use Mutability::*;

fn method(
    name: &str,
    args: &[ArgKind],
    returns: ReturnKind,
    mutability: Mutability,
    core: bool,
) -> MethodSpec {
    MethodSpec {
        name: name.to_string(),
        arg_kinds: args.to_vec(),
        returns,
        mutability,
        core,
    }
}

fn queue_methods(core: bool) -> Vec<MethodSpec> {
    vec![
        method("offer", &[ScalarValue], ReturnKind::Bool, Update, core),
        method("poll", &[], ReturnKind::Nullable, Update, core),
        method("peek", &[], ReturnKind::Nullable, ReadOnly, core),
        method("clear", &[], ReturnKind::Unit, Update, false),
        method(
            "addAll",
            &[ValueCollection],
            ReturnKind::Bool,
            Update,
            false,
        ),
        method(
            "removeAll",
            &[ValueCollection],
            ReturnKind::Bool,
            Update,
            false,
        ),
        method(
            "contains",
            &[ScalarValue],
            ReturnKind::Bool,
            ReadOnly,
            false,
        ),
        method(
            "containsAll",
            &[ValueCollection],
            ReturnKind::Bool,
            ReadOnly,
            false,
        ),
        method("size", &[], ReturnKind::Int, ReadOnly, false),
        method("isEmpty", &[], ReturnKind::Bool, ReadOnly, false),
        method("toArray", &[], ReturnKind::List, ReadOnly, false),
    ]
}

impl SequentialSpec {
    /// The built-in specification of `family` with its default core set.
    pub fn new(family: Family) -> Self {
        let methods = match family {
            Family::OrderedMap => vec![
                method(
                    "put",
                    &[KeyScalar, ValueScalar],
                    ReturnKind::Nullable,
                    Update,
                    true,
                ),
                method("get", &[KeyScalar], ReturnKind::Nullable, ReadOnly, true),
                method("remove", &[KeyScalar], ReturnKind::Nullable, Update, true),
                method(
                    "containsKey",
                    &[KeyScalar],
                    ReturnKind::Bool,
                    ReadOnly,
                    true,
                ),
                method(
                    "containsValue",
                    &[ValueScalar],
                    ReturnKind::Bool,
                    ReadOnly,
                    false,
                ),
                method("clear", &[], ReturnKind::Unit, Update, false),
                method(
                    "putAll",
                    &[KeyValueCollection],
                    ReturnKind::Unit,
                    Update,
                    false,
                ),
                method("size", &[], ReturnKind::Int, ReadOnly, false),
                method("isEmpty", &[], ReturnKind::Bool, ReadOnly, false),
            ],
            Family::FifoQueue => queue_methods(true),
            Family::Deque => {
                let mut ms = queue_methods(true);
                ms.extend([
                    method("offerFirst", &[ScalarValue], ReturnKind::Bool, Update, true),
                    method("offerLast", &[ScalarValue], ReturnKind::Bool, Update, true),
                    method("pollFirst", &[], ReturnKind::Nullable, Update, true),
                    method("pollLast", &[], ReturnKind::Nullable, Update, true),
                    method("peekFirst", &[], ReturnKind::Nullable, ReadOnly, true),
                    method("peekLast", &[], ReturnKind::Nullable, ReadOnly, true),
                ]);
                ms
            }
            Family::OrderedSet => vec![
                method("add", &[ScalarValue], ReturnKind::Bool, Update, true),
                method("remove", &[ScalarValue], ReturnKind::Bool, Update, true),
                method("contains", &[ScalarValue], ReturnKind::Bool, ReadOnly, true),
                method("clear", &[], ReturnKind::Unit, Update, false),
                method("size", &[], ReturnKind::Int, ReadOnly, false),
                method("isEmpty", &[], ReturnKind::Bool, ReadOnly, false),
                method("headSet", &[ScalarValue], ReturnKind::List, ReadOnly, false),
                method(
                    "subSet",
                    &[ScalarValue, ScalarValue],
                    ReturnKind::List,
                    ReadOnly,
                    false,
                ),
            ],
        };
        SequentialSpec { family, methods }
    }

    /// Applies metadata overrides; fails on names the family does not have.
    pub fn with_overrides(mut self, overrides: &[MethodOverride]) -> Result<Self, SpecError> {
        for o in overrides {
            let family = self.family;
            let m = self
                .methods
                .iter_mut()
                .find(|m| m.name == o.name)
                .ok_or_else(|| SpecError::UnknownMethod {
                    family,
                    method: o.name.clone(),
                })?;
            if let Some(mu) = o.mutability {
                m.mutability = mu;
            }
            if let Some(c) = o.core {
                m.core = c;
            }
        }
        Ok(self)
    }

    /// Replaces the core set.
    pub fn with_core<S: AsRef<str>>(mut self, core: &[S]) -> Result<Self, SpecError> {
        for name in core {
            self.method(name.as_ref())?;
        }
        for m in &mut self.methods {
            m.core = core.iter().any(|c| c.as_ref() == m.name);
        }
        Ok(self)
    }

    pub fn method(&self, name: &str) -> Result<&MethodSpec, SpecError> {
        self.methods
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| SpecError::UnknownMethod {
                family: self.family,
                method: name.to_string(),
            })
    }

    pub fn core_methods(&self) -> Vec<&str> {
        self.methods
            .iter()
            .filter(|m| m.core)
            .map(|m| m.name.as_str())
            .collect()
    }

    pub fn classify(&self, name: &str) -> Result<(Mutability, bool), SpecError> {
        self.method(name).map(|m| (m.mutability, m.core))
    }

    pub fn new_state(&self) -> State {
        match self.family {
            Family::OrderedMap => State::Map(BTreeMap::new()),
            Family::FifoQueue | Family::Deque => State::Queue(VecDeque::new()),
            Family::OrderedSet => State::Set(BTreeSet::new()),
        }
    }

    /// Checks arity and argument kinds of `inv`.
    pub fn validate(&self, inv: &Invocation) -> Result<&MethodSpec, SpecError> {
        let m = self.method(&inv.method)?;
        if m.arg_kinds.len() != inv.args.len() {
            return Err(SpecError::Arity {
                method: inv.method.clone(),
                expected: m.arg_kinds.len(),
                got: inv.args.len(),
            });
        }
        for (index, (kind, arg)) in m.arg_kinds.iter().zip(&inv.args).enumerate() {
            let ok = match kind {
                ScalarValue | KeyScalar | ValueScalar => matches!(arg, Value::Int(i) if *i >= 0),
                ValueCollection => match arg {
                    Value::List(items) => items.iter().all(|v| matches!(v, Value::Int(_))),
                    _ => false,
                },
                KeyValueCollection => match arg {
                    Value::Map(entries) => entries
                        .iter()
                        .all(|(k, v)| matches!((k, v), (Value::Int(_), Value::Int(_)))),
                    Value::List(items) => items.is_empty(),
                    _ => false,
                },
            };
            if !ok {
                return Err(SpecError::ArgKind {
                    method: inv.method.clone(),
                    index,
                    expected: *kind,
                    got: {
                        let mut s = String::new();
                        let _ = arg.fmt_arg(&mut s);
                        s
                    },
                });
            }
        }
        Ok(m)
    }

    /// Executes `inv` on `state`, returning the method's return value.
    pub fn apply(&self, state: &mut State, inv: &Invocation) -> Result<Value, SpecError> {
        self.validate(inv)?;
        let int = |i: usize| inv.args[i].as_int().unwrap_or_default();
        let ints = |i: usize| -> Vec<i64> {
            match &inv.args[i] {
                Value::List(items) => items.iter().filter_map(Value::as_int).collect(),
                _ => Vec::new(),
            }
        };
        let m = inv.method.as_str();
        let ret = match state {
            State::Map(map) => match m {
                "put" => map.insert(int(0), int(1)).into(),
                "get" => map.get(&int(0)).copied().into(),
                "remove" => map.remove(&int(0)).into(),
                "containsKey" => map.contains_key(&int(0)).into(),
                "containsValue" => map.values().any(|v| *v == int(0)).into(),
                "clear" => {
                    map.clear();
                    Value::Unit
                }
                "putAll" => {
                    if let Value::Map(entries) = &inv.args[0] {
                        for (k, v) in entries {
                            map.insert(
                                k.as_int().unwrap_or_default(),
                                v.as_int().unwrap_or_default(),
                            );
                        }
                    }
                    Value::Unit
                }
                "size" => Value::Int(map.len() as i64),
                "isEmpty" => map.is_empty().into(),
                _ => unreachable!("validated method {m}"),
            },
            State::Queue(q) => match m {
                "offer" | "offerLast" => {
                    q.push_back(int(0));
                    Value::Bool(true)
                }
                "offerFirst" => {
                    q.push_front(int(0));
                    Value::Bool(true)
                }
                "poll" | "pollFirst" => q.pop_front().into(),
                "pollLast" => q.pop_back().into(),
                "peek" | "peekFirst" => q.front().copied().into(),
                "peekLast" => q.back().copied().into(),
                "clear" => {
                    q.clear();
                    Value::Unit
                }
                "addAll" => {
                    let xs = ints(0);
                    q.extend(xs.iter().copied());
                    (!xs.is_empty()).into()
                }
                "removeAll" => {
                    let xs = ints(0);
                    let before = q.len();
                    q.retain(|e| !xs.contains(e));
                    (q.len() != before).into()
                }
                "contains" => q.contains(&int(0)).into(),
                "containsAll" => ints(0).iter().all(|x| q.contains(x)).into(),
                "size" => Value::Int(q.len() as i64),
                "isEmpty" => q.is_empty().into(),
                "toArray" => Value::List(q.iter().map(|&e| Value::Int(e)).collect()),
                _ => unreachable!("validated method {m}"),
            },
            State::Set(set) => match m {
                "add" => set.insert(int(0)).into(),
                "remove" => set.remove(&int(0)).into(),
                "contains" => set.contains(&int(0)).into(),
                "clear" => {
                    set.clear();
                    Value::Unit
                }
                "size" => Value::Int(set.len() as i64),
                "isEmpty" => set.is_empty().into(),
                "headSet" => Value::List(set.range(..int(0)).map(|&e| Value::Int(e)).collect()),
                "subSet" => {
                    let (lo, hi) = (int(0), int(1));
                    if lo > hi {
                        Value::Exception
                    } else {
                        Value::List(set.range(lo..hi).map(|&e| Value::Int(e)).collect())
                    }
                }
                _ => unreachable!("validated method {m}"),
            },
        };
        Ok(ret)
    }

    /// Replays `invs` from the initial state, collecting the return values.
    pub fn replay<'a>(
        &self,
        invs: impl IntoIterator<Item = &'a Invocation>,
    ) -> Result<Vec<Value>, SpecError> {
        let mut s = self.new_state();
        invs.into_iter()
            .map(|inv| self.apply(&mut s, inv))
            .collect()
    }
}
