use std::fmt;

use serde::{Deserialize, Serialize};

use crate::value::Value;

/// Return values of one harness execution, indexed by invocation index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Outcome(pub Vec<Value>);

impl Outcome {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    /// Fixed-order byte encoding, used as the hash-set key for membership.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.0.len() * 9);
        self.0.iter().for_each(|v| v.encode_into(&mut out));
        out
    }
}

/// Lets hash maps keyed by outcomes be probed with a borrowed slot buffer;
/// the derived `Hash` and `Eq` agree with those of the slice.
impl std::borrow::Borrow<[Value]> for Outcome {
    fn borrow(&self) -> &[Value] {
        &self.0
    }
}

impl From<Vec<Value>> for Outcome {
    fn from(v: Vec<Value>) -> Self {
        Outcome(v)
    }
}

/// Tuple notation, e.g. `(null,(),null,true)`.
impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}
