//! Sparse weight vectors over the lattice.

use crate::index::MultiIndex;
use std::collections::BTreeMap;

/// A finite map from lattice states to real weights: the expansion
/// coefficients of the observable in the shifted monomial basis.
///
/// Backed by an ordered map so that iteration (and therefore every
/// propagation step and printed result) is deterministic.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct WeightMap {
    weights: BTreeMap<MultiIndex, f64>,
}

impl WeightMap {
    pub fn new() -> Self {
        WeightMap::default()
    }

    /// The indicator weight `{state: 1.0}`.
    pub fn unit(state: MultiIndex) -> Self {
        let mut w = Self::new();
        w.weights.insert(state, 1.0);
        w
    }

    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut w = Self::new();
        for (n, c) in entries {
            w.accumulate(n, c);
        }
        w.prune_zeros();
        w
    }

    pub fn get(&self, state: &MultiIndex) -> f64 {
        self.weights.get(state).copied().unwrap_or(0.0)
    }

    pub fn accumulate(&mut self, state: MultiIndex, value: f64) {
        *self.weights.entry(state).or_insert(0.0) += value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.weights.iter().map(|(n, &c)| (n, c))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.weights.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drops entries that cancelled to exactly zero. Nothing smaller is
    /// touched; magnitude-based pruning is opt-in via
    /// [`prune_below`](Self::prune_below).
    pub fn prune_zeros(&mut self) {
        self.weights.retain(|_, c| *c != 0.0);
    }

    /// Drops entries with magnitude strictly below `threshold`. This is an
    /// approximation: results then depend on the threshold.
    pub fn prune_below(&mut self, threshold: f64) {
        self.weights.retain(|_, c| c.abs() >= threshold);
    }
}

impl FromIterator<(MultiIndex, f64)> for WeightMap {
    fn from_iter<I: IntoIterator<Item = (MultiIndex, f64)>>(iter: I) -> Self {
        Self::from_entries(iter)
    }
}
