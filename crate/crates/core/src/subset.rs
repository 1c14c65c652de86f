//! Canonical vertex subsets over a fixed universe `{0, .., q-1}`.
//!
//! Subsets double as score-cache keys, so equality and hashing must be fast
//! and representation-canonical: for universes up to 64 vertices the set is a
//! single bitmask, above that a sorted index list. The representation is a
//! function of the universe size alone, so two equal sets always compare and
//! hash identically.

use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

const MASK_LIMIT: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    Mask(u64),
    Sorted(Vec<u16>),
}

/// A subset of the vertex universe `{0, .., q-1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    q: u16,
    repr: Repr,
}

impl VertexSet {
    pub fn empty(q: usize) -> Self {
        assert!(
            q >= 1 && q <= u16::MAX as usize,
            "universe size out of range"
        );
        let repr = if q <= MASK_LIMIT {
            Repr::Mask(0)
        } else {
            Repr::Sorted(Vec::new())
        };
        VertexSet { q: q as u16, repr }
    }

    pub fn full(q: usize) -> Self {
        let mut s = Self::empty(q);
        for v in 0..q {
            s.insert(v);
        }
        s
    }

    pub fn singleton(q: usize, v: usize) -> Self {
        let mut s = Self::empty(q);
        s.insert(v);
        s
    }

    /// Builds a set from arbitrary (possibly unsorted, possibly repeated)
    /// indices, rejecting out-of-range vertices.
    pub fn from_indices(q: usize, indices: &[usize]) -> Result<Self> {
        let mut s = Self::empty(q);
        for &v in indices {
            if v >= q {
                return Err(Error::Invalid(format!(
                    "vertex {} out of range for universe of size {}",
                    v + 1,
                    q
                )));
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub fn universe(&self) -> usize {
        self.q as usize
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Mask(m) => m.count_ones() as usize,
            Repr::Sorted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn complement_len(&self) -> usize {
        self.universe() - self.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        debug_assert!(v < self.universe());
        match &self.repr {
            Repr::Mask(m) => (m >> v) & 1 == 1,
            Repr::Sorted(s) => s.binary_search(&(v as u16)).is_ok(),
        }
    }

    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.universe());
        match &mut self.repr {
            Repr::Mask(m) => *m |= 1 << v,
            Repr::Sorted(s) => {
                if let Err(pos) = s.binary_search(&(v as u16)) {
                    s.insert(pos, v as u16);
                }
            }
        }
    }

    pub fn remove(&mut self, v: usize) {
        debug_assert!(v < self.universe());
        match &mut self.repr {
            Repr::Mask(m) => *m &= !(1 << v),
            Repr::Sorted(s) => {
                if let Ok(pos) = s.binary_search(&(v as u16)) {
                    s.remove(pos);
                }
            }
        }
    }

    /// The set with `v` added, leaving `self` untouched.
    pub fn with(&self, v: usize) -> Self {
        let mut s = self.clone();
        s.insert(v);
        s
    }

    pub fn without(&self, v: usize) -> Self {
        let mut s = self.clone();
        s.remove(v);
        s
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        debug_assert_eq!(self.q, other.q);
        match (&self.repr, &other.repr) {
            (Repr::Mask(a), Repr::Mask(b)) => a & !b == 0,
            _ => self.iter().all(|v| other.contains(v)),
        }
    }

    /// Ascending member indices.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let items: Vec<usize> = match &self.repr {
            Repr::Mask(m) => {
                let mut out = Vec::with_capacity(m.count_ones() as usize);
                let mut bits = *m;
                while bits != 0 {
                    out.push(bits.trailing_zeros() as usize);
                    bits &= bits - 1;
                }
                out
            }
            Repr::Sorted(s) => s.iter().map(|&v| v as usize).collect(),
        };
        items.into_iter()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Members of the complement, ascending.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.universe())
            .filter(|&v| !self.contains(v))
            .collect()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "}}")
    }
}

/// Serializes as the sorted list of 1-based member indices, matching the
/// on-disk graph and report formats.
impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for v in self.iter() {
            seq.serialize_element(&(v + 1))?;
        }
        seq.end()
    }
}
