//! Real intervals and finite disjoint unions of them.
//!
//! Every set that appears in the verifiers (sublevel sets, witness sets,
//! cascade sets, supports) is stored as an [`IntervalUnion`]. Set algebra
//! works directly on endpoints, so measures are sums of endpoint
//! differences with no sampling involved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct RealInterval {
    lo: f64,
    hi: f64,
}

impl RealInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "interval endpoints must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo > hi {
            return Err(Error::InvalidArgument(format!(
                "interval [{lo}, {hi}] has lo > hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Interval of length `len` starting at `lo`.
    pub fn with_length(lo: f64, len: f64) -> Result<Self> {
        Self::new(lo, lo + len)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn translate(&self, b: f64) -> Self {
        Self {
            lo: self.lo + b,
            hi: self.hi + b,
        }
    }

    /// Intersection, `None` when the overlap has zero length.
    pub fn intersect(&self, other: &RealInterval) -> Option<RealInterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (hi > lo).then_some(RealInterval { lo, hi })
    }
}

impl TryFrom<[f64; 2]> for RealInterval {
    type Error = Error;

    fn try_from(pair: [f64; 2]) -> Result<Self> {
        Self::new(pair[0], pair[1])
    }
}

impl From<RealInterval> for [f64; 2] {
    fn from(i: RealInterval) -> Self {
        [i.lo, i.hi]
    }
}

/// Finite union of pairwise disjoint closed intervals, kept sorted.
///
/// Touching or overlapping components are merged and zero-length pieces
/// dropped, so two unions describing the same set up to a null set have
/// the same representation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct IntervalUnion {
    intervals: Vec<RealInterval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_interval(i: RealInterval) -> Self {
        Self::from_intervals([i])
    }

    pub fn from_intervals(iter: impl IntoIterator<Item = RealInterval>) -> Self {
        let mut raw: Vec<RealInterval> = iter.into_iter().filter(|i| i.hi > i.lo).collect();
        raw.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<RealInterval> = Vec::with_capacity(raw.len());
        for i in raw {
            match merged.last_mut() {
                Some(last) if i.lo <= last.hi => last.hi = last.hi.max(i.hi),
                _ => merged.push(i),
            }
        }
        Self { intervals: merged }
    }

    /// Builds a union from `[lo, hi]` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let intervals = pairs
            .iter()
            .map(|&(lo, hi)| RealInterval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(intervals))
    }

    pub fn intervals(&self) -> &[RealInterval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure: the sum of component lengths.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(RealInterval::length).sum()
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<RealInterval> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(RealInterval {
            lo: first.lo,
            hi: last.hi,
        })
    }

    pub fn diameter(&self) -> f64 {
        self.hull().map_or(0.0, |h| h.length())
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|i| i.hi < x);
        self.intervals.get(idx).is_some_and(|i| i.contains(x))
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        Self::from_intervals(self.intervals.iter().chain(other.intervals.iter()).copied())
    }

    pub fn intersect(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = self.intervals[i];
            let b = other.intervals[j];
            if let Some(c) = a.intersect(&b) {
                out.push(c);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    pub fn intersect_interval(&self, interval: &RealInterval) -> IntervalUnion {
        self.intersect(&IntervalUnion::from_interval(*interval))
    }

    /// Set difference `self \ other`.
    pub fn subtract(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut out = Vec::new();
        let mut j = 0;
        for a in &self.intervals {
            let mut cursor = a.lo;
            while j < other.intervals.len() && other.intervals[j].hi <= cursor {
                j += 1;
            }
            let mut k = j;
            while k < other.intervals.len() && other.intervals[k].lo < a.hi {
                let b = other.intervals[k];
                if b.lo > cursor {
                    out.push(RealInterval { lo: cursor, hi: b.lo });
                }
                cursor = cursor.max(b.hi);
                if cursor >= a.hi {
                    break;
                }
                k += 1;
            }
            if cursor < a.hi {
                out.push(RealInterval { lo: cursor, hi: a.hi });
            }
        }
        Self::from_intervals(out)
    }

    pub fn translate(&self, b: f64) -> IntervalUnion {
        Self::from_intervals(self.intervals.iter().map(|i| i.translate(b)))
    }

    /// Leftmost subset of measure exactly `target` (or the whole set when
    /// `target` exceeds the measure).
    pub fn truncate_to_measure(&self, target: f64) -> IntervalUnion {
        let mut remaining = target.max(0.0);
        let mut out = Vec::new();
        for i in &self.intervals {
            if remaining <= 0.0 {
                break;
            }
            let len = i.length();
            if len <= remaining {
                out.push(*i);
                remaining -= len;
            } else {
                out.push(RealInterval {
                    lo: i.lo,
                    hi: i.lo + remaining,
                });
                remaining = 0.0;
            }
        }
        Self::from_intervals(out)
    }

    /// `true` when `self \ other` has measure at most `tol`.
    pub fn is_subset_of(&self, other: &IntervalUnion, tol: f64) -> bool {
        self.subtract(other).measure() <= tol
    }

    /// Uniformly spaced sample points inside the set, roughly `step` apart,
    /// always including each component's midpoint.
    pub fn sample_points(&self, step: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        for i in &self.intervals {
            let n = (i.length() / step).ceil().max(1.0) as usize;
            let h = i.length() / n as f64;
            pts.extend((0..n).map(|k| i.lo + (k as f64 + 0.5) * h));
        }
        pts
    }

    /// A point drawn uniformly from the set, `None` when it has no measure.
    pub fn sample_uniform<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        let total = self.measure();
        if total <= 0.0 {
            return None;
        }
        let mut s = rng.gen::<f64>() * total;
        for i in &self.intervals {
            if s < i.length() {
                return Some(i.lo + s);
            }
            s -= i.length();
        }
        self.intervals.iter().rev().find(|i| i.length() > 0.0).map(|i| i.hi)
    }
}

impl TryFrom<Vec<[f64; 2]>> for IntervalUnion {
    type Error = Error;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self> {
        let intervals = pairs
            .into_iter()
            .map(RealInterval::try_from)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(intervals))
    }
}

impl From<IntervalUnion> for Vec<[f64; 2]> {
    fn from(u: IntervalUnion) -> Self {
        u.intervals.into_iter().map(Into::into).collect()
    }
}

impl From<RealInterval> for IntervalUnion {
    fn from(i: RealInterval) -> Self {
        Self::from_interval(i)
    }
}

/// Binary set operation selector for [`set_algebra`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Subtract,
}

/// Right operand of [`set_algebra`]: another set, or a translation amount.
#[derive(Debug, Clone)]
pub enum Operand<'a> {
    Set(SetOp, &'a IntervalUnion),
    Translate(f64),
}

/// Dispatches one set-algebra operation.
pub fn set_algebra(a: &IntervalUnion, op: Operand<'_>) -> IntervalUnion {
    match op {
        Operand::Set(SetOp::Union, b) => a.union(b),
        Operand::Set(SetOp::Intersect, b) => a.intersect(b),
        Operand::Set(SetOp::Subtract, b) => a.subtract(b),
        Operand::Translate(t) => a.translate(t),
    }
}
