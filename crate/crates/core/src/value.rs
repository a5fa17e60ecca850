//! Argument and return values, and method invocations.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A value passed to or returned from a method of the object under test.
///
/// All exceptions collapse to the single [`Value::Exception`] symbol, so any
/// two exceptional returns compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    /// The `()` return of a void method.
    Unit,
    Null,
    Bool(bool),
    Int(i64),
    List(Vec<Value>),
    /// Key/value pairs, kept sorted by key with distinct keys.
    Map(Vec<(Value, Value)>),
    Exception,
}

impl Value {
    /// Builds a map value, normalizing to sorted-by-key order.
    pub fn map(mut entries: Vec<(Value, Value)>) -> Value {
        entries.sort();
        entries.dedup_by(|a, b| a.0 == b.0);
        Value::Map(entries)
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// Calls `f` on every scalar atom contained in this value (recursing into
    /// lists and maps).
    pub fn for_each_atom(&self, f: &mut impl FnMut(&Value)) {
        match self {
            Value::List(items) => items.iter().for_each(|v| v.for_each_atom(f)),
            Value::Map(entries) => entries.iter().for_each(|(k, v)| {
                k.for_each_atom(f);
                v.for_each_atom(f);
            }),
            other => f(other),
        }
    }

    /// Appends a fixed-order byte encoding of this value.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Value::Unit => out.push(0),
            Value::Null => out.push(1),
            Value::Bool(b) => out.extend_from_slice(&[2, *b as u8]),
            Value::Int(i) => {
                out.push(3);
                out.extend_from_slice(&i.to_le_bytes());
            }
            Value::List(items) => {
                out.push(4);
                out.extend_from_slice(&(items.len() as u32).to_le_bytes());
                items.iter().for_each(|v| v.encode_into(out));
            }
            Value::Map(entries) => {
                out.push(5);
                out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
                for (k, v) in entries {
                    k.encode_into(out);
                    v.encode_into(out);
                }
            }
            Value::Exception => out.push(6),
        }
    }

    /// Writes the value in harness-argument notation: collections use braces,
    /// e.g. `{0=1,1=0}` or `{1,1}`.
    pub fn fmt_arg(&self, f: &mut impl fmt::Write) -> fmt::Result {
        match self {
            Value::List(items) => {
                f.write_char('{')?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    v.fmt_arg(f)?;
                }
                f.write_char('}')
            }
            Value::Map(entries) => {
                f.write_char('{')?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    k.fmt_arg(f)?;
                    f.write_char('=')?;
                    v.fmt_arg(f)?;
                }
                f.write_char('}')
            }
            other => write!(f, "{other}"),
        }
    }
}

/// Outcome notation: integers, `()`, `null`, `true`/`false`, `[v,...]`,
/// `[k=v,...]` and `E`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("()"),
            Value::Null => f.write_str("null"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Map(entries) => {
                f.write_str("[")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}={v}")?;
                }
                f.write_str("]")
            }
            Value::Exception => f.write_str("E"),
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

/// A method name applied to concrete argument values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Invocation {
    pub method: String,
    pub args: Vec<Value>,
}

impl Invocation {
    pub fn new(method: impl Into<String>, args: Vec<Value>) -> Self {
        Invocation {
            method: method.into(),
            args,
        }
    }
}

impl fmt::Display for Invocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.method)?;
        f.write_str("(")?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            a.fmt_arg(f)?;
        }
        f.write_str(")")
    }
}
