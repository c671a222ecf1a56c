//! Multi-indices: vectors of non-negative integers.
//!
//! A [`MultiIndex`] plays three roles in this crate: a lattice state, a
//! moment order, and a monomial exponent vector. Ordering is lexicographic,
//! which makes every map keyed by multi-indices iterate deterministically.

use smallvec::SmallVec;
use std::fmt;
use std::ops::Index;

type Entries = SmallVec<[u32; 4]>;

/// A vector of non-negative integers of fixed length (the state dimension).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct MultiIndex(Entries);

impl MultiIndex {
    pub fn new(entries: impl IntoIterator<Item = u32>) -> Self {
        MultiIndex(entries.into_iter().collect())
    }

    pub fn from_slice(entries: &[u32]) -> Self {
        MultiIndex(SmallVec::from_slice(entries))
    }

    /// The all-zeros index of the given length.
    pub fn zeros(len: usize) -> Self {
        MultiIndex(std::iter::repeat(0).take(len).collect())
    }

    /// The standard unit index `e_axis`.
    pub fn unit(len: usize, axis: usize) -> Self {
        debug_assert!(axis < len);
        let mut u = Self::zeros(len);
        u.0[axis] = 1;
        u
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Component-wise sum with a signed shift vector; `None` when the result
    /// would leave the non-negative lattice.
    pub fn offset(&self, shift: &[i32]) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), shift.len());
        let mut out = Entries::with_capacity(self.len());
        for (&n, &v) in self.0.iter().zip(shift) {
            let c = n as i64 + v as i64;
            if c < 0 {
                return None;
            }
            out.push(c as u32);
        }
        Some(MultiIndex(out))
    }

    /// Component-wise `self <= other`.
    pub fn dominated_by(&self, other: &MultiIndex) -> bool {
        self.len() == other.len() && self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }
}

impl Index<usize> for MultiIndex {
    type Output = u32;

    fn index(&self, d: usize) -> &u32 {
        &self.0[d]
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (d, e) in self.0.iter().enumerate() {
            if d > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Iterates every multi-index `m` with `m <= upper` component-wise, in
/// lexicographic order with the last component varying fastest.
pub fn multi_range(upper: &MultiIndex) -> MultiRange {
    MultiRange {
        upper: upper.clone(),
        next: Some(MultiIndex::zeros(upper.len())),
    }
}

pub struct MultiRange {
    upper: MultiIndex,
    next: Option<MultiIndex>,
}

impl Iterator for MultiRange {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        // odometer increment, last component fastest
        let mut d = succ.0.len();
        loop {
            if d == 0 {
                break; // wrapped past the first component: exhausted
            }
            d -= 1;
            if succ.0[d] < self.upper.0[d] {
                succ.0[d] += 1;
                self.next = Some(succ);
                break;
            }
            succ.0[d] = 0;
        }
        Some(current)
    }
}
