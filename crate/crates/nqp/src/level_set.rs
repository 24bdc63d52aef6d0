//! The finite set of admissible weight values.

use crate::error::{Error, Result};
use std::fmt;

/// An ordered finite set of integers `S = {s1 < s2 < ... < sn}`, the values an
/// assignment component may take.
///
/// A valid set has at least two strictly increasing members. [`LevelSet::new`]
/// enforces this; [`LevelSet::new_unchecked`] defers the check so that parsers
/// and validators can report violations themselves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelSet {
    values: Vec<i64>,
}

impl LevelSet {
    /// Build a level set, rejecting sets that are too small or not strictly increasing.
    pub fn new(values: Vec<i64>) -> Result<Self> {
        let set = Self::new_unchecked(values);
        match set.first_order_violation() {
            None if set.len() >= 2 => Ok(set),
            None => Err(Error::InvalidLevelSet(format!(
                "need at least 2 values, got {}",
                set.len()
            ))),
            Some(j) => Err(Error::InvalidLevelSet(format!(
                "values must be strictly increasing, violated at positions {j} and {}",
                j + 1
            ))),
        }
    }

    /// Build without validating. Used by the parser and by validation tests.
    pub fn new_unchecked(values: Vec<i64>) -> Self {
        Self { values }
    }

    /// Convenience constructor for the binary set `{0, 1}`.
    pub fn binary() -> Self {
        Self { values: vec![0, 1] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn contains(&self, value: i64) -> bool {
        self.values.binary_search(&value).is_ok()
    }

    /// Position of `value` in the set, if present.
    pub fn index_of(&self, value: i64) -> Option<usize> {
        self.values.binary_search(&value).ok()
    }

    pub fn value_at(&self, index: usize) -> i64 {
        self.values[index]
    }

    /// Smallest member `s1`.
    pub fn smallest(&self) -> i64 {
        self.values[0]
    }

    /// Member of largest absolute value; on a tie the negative one is chosen,
    /// so the result is always unique.
    pub fn max_abs_member(&self) -> i64 {
        let lo = self.values[0];
        let hi = self.values[self.values.len() - 1];
        if lo.abs() >= hi.abs() {
            lo
        } else {
            hi
        }
    }

    /// First index `j` with `values[j] >= values[j+1]`, if the order is violated.
    pub(crate) fn first_order_violation(&self) -> Option<usize> {
        self.values.windows(2).position(|w| w[0] >= w[1])
    }

    /// True when the set satisfies its invariants (n >= 2, strictly increasing).
    pub fn is_valid(&self) -> bool {
        self.values.len() >= 2 && self.first_order_violation().is_none()
    }
}

impl fmt::Display for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}
