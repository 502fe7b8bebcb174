//! Finite probability tables with explicit truncation bookkeeping.

use crate::error::Error;
use crate::Result;

/// Slack allowed on entries and mass checks before a table is rejected.
/// Quadrature noise may push an analytically zero entry a hair negative;
/// anything below `-ENTRY_SLACK` is treated as a real defect.
const ENTRY_SLACK: f64 = 1e-9;

/// A probability table over a contiguous index range, with the unassigned
/// tail mass recorded instead of renormalized so truncation error stays
/// auditable.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    offset: usize,
    probs: Vec<f64>,
    tail_mass: f64,
}

impl Pmf {
    /// Builds a table, clamping sub-`ENTRY_SLACK` negative noise to zero and
    /// rejecting entries outside [0, 1].
    pub fn new(offset: usize, probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        let mut probs = probs;
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -ENTRY_SLACK || *p > 1.0 + ENTRY_SLACK {
                return Err(Error::InvalidPmf(format!(
                    "entry {p} at index {} outside [0, 1]",
                    offset + i
                )));
            }
            *p = p.clamp(0.0, 1.0);
        }
        if !tail_mass.is_finite() || tail_mass < -ENTRY_SLACK {
            return Err(Error::InvalidPmf(format!(
                "tail mass {tail_mass} negative"
            )));
        }
        Ok(Self {
            offset,
            probs,
            tail_mass: tail_mass.max(0.0),
        })
    }

    /// Like [`Pmf::new`], but additionally requires stored mass plus tail to
    /// lie within `tol` of one.
    pub fn new_normalized(
        offset: usize,
        probs: Vec<f64>,
        tail_mass: f64,
        tol: f64,
    ) -> Result<Self> {
        let pmf = Self::new(offset, probs, tail_mass)?;
        let total = pmf.stored_mass() + pmf.tail_mass;
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidPmf(format!(
                "total mass {total} deviates from 1 by more than {tol:e}"
            )));
        }
        Ok(pmf)
    }

    /// Lowest stored index.
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Highest stored index.
    pub fn max_index(&self) -> usize {
        self.offset + self.probs.len().saturating_sub(1)
    }

    /// Probability of `index`; zero outside the stored range.
    pub fn prob(&self, index: usize) -> f64 {
        if index < self.offset {
            return 0.0;
        }
        self.probs.get(index - self.offset).copied().unwrap_or(0.0)
    }

    /// Mass not assigned to stored entries.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Sum of stored entries.
    pub fn stored_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Σ index · prob over the stored entries. The contribution of the
    /// unresolved tail is bounded separately by [`Pmf::unresolved_tail_bound`].
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (self.offset + i) as f64 * p)
            .sum()
    }

    /// `tail_mass * (max stored index + 1)`: the mean contribution the tail
    /// would have if it sat just past the stored range. Flagged, not added.
    pub fn unresolved_tail_bound(&self) -> f64 {
        self.tail_mass * (self.max_index() as f64 + 1.0)
    }

    /// Stored `(index, probability)` pairs in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.offset + i, p))
    }

    /// Largest absolute difference on the union of stored ranges.
    pub fn max_abs_diff(&self, other: &Pmf) -> f64 {
        let lo = self.offset.min(other.offset);
        let hi = self.max_index().max(other.max_index());
        (lo..=hi)
            .map(|j| (self.prob(j) - other.prob(j)).abs())
            .fold(0.0, f64::max)
    }
}
