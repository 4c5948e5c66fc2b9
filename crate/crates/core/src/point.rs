use std::fmt;

use serde::{Deserialize, Serialize};

/// Opaque point identifier.
///
/// Ordering is derived and therefore deterministic: `Int` points sort before
/// `Pair` points, which sort before `Support` points. Each space documents
/// which variant it uses:
///
/// * `Int(n)` for line-based spaces and finite vertex sets,
/// * `Pair(attachment, position)` for decorated spaces and trees,
/// * `Support(mask)` for finitely supported sequences (bit `k - 1` set iff
///   coordinate `k` is nonzero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointRef {
    Int(i64),
    Pair(i64, u64),
    Support(u64),
}

impl PointRef {
    pub fn as_int(self) -> Option<i64> {
        match self {
            PointRef::Int(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for PointRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointRef::Int(v) => write!(f, "{v}"),
            PointRef::Pair(a, b) => write!(f, "({a},{b})"),
            PointRef::Support(mask) => write!(f, "supp{mask:#b}"),
        }
    }
}

impl From<i64> for PointRef {
    fn from(v: i64) -> Self {
        PointRef::Int(v)
    }
}
