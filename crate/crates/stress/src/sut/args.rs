//! Argument decoding shared by the implementations. Malformed arguments
//! decode to `None`, which the callers turn into an exception value.

use atomicity_core::Value;

pub fn int(args: &[Value], i: usize) -> Option<i64> {
    args.get(i)?.as_int()
}

pub fn ints(args: &[Value], i: usize) -> Option<Vec<i64>> {
    match args.get(i)? {
        Value::List(items) => items.iter().map(Value::as_int).collect(),
        _ => None,
    }
}

pub fn entries(args: &[Value], i: usize) -> Option<Vec<(i64, i64)>> {
    match args.get(i)? {
        Value::Map(items) => items
            .iter()
            .map(|(k, v)| Some((k.as_int()?, v.as_int()?)))
            .collect(),
        _ => None,
    }
}

pub fn opt(v: Option<i64>) -> Value {
    v.map_or(Value::Null, Value::Int)
}

pub fn list<'a>(items: impl IntoIterator<Item = &'a i64>) -> Value {
    Value::List(items.into_iter().map(|&e| Value::Int(e)).collect())
}
