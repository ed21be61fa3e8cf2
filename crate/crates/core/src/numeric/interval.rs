use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ExactNumber;

/// A real interval with exact endpoints and explicit open/closed ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: ExactNumber,
    pub hi: ExactNumber,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// `[lo, hi)`.
    pub fn half_open(lo: ExactNumber, hi: ExactNumber) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn closed(lo: ExactNumber, hi: ExactNumber) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn point(x: ExactNumber) -> Self {
        Interval::closed(x.clone(), x)
    }

    /// `[0, 1)`.
    pub fn unit() -> Self {
        Interval::half_open(ExactNumber::zero(), ExactNumber::one())
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp_exact(&self.hi) {
            Ordering::Greater => true,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Less => false,
        }
    }

    pub fn length(&self) -> ExactNumber {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &ExactNumber) -> bool {
        let above = match x.cmp_exact(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        let below = match x.cmp_exact(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    /// `self ⊆ other`, respecting end flags. An empty interval is a subset
    /// of anything.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        if self.is_empty() {
            return true;
        }
        let lo_ok = match self.lo.cmp_exact(&other.lo) {
            Ordering::Greater => true,
            Ordering::Equal => other.lo_closed || !self.lo_closed,
            Ordering::Less => false,
        };
        let hi_ok = match self.hi.cmp_exact(&other.hi) {
            Ordering::Less => true,
            Ordering::Equal => other.hi_closed || !self.hi_closed,
            Ordering::Greater => false,
        };
        lo_ok && hi_ok
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.cmp_exact(&other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp_exact(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    /// Exact disjointness, end flags included.
    pub fn is_disjoint(&self, other: &Interval) -> bool {
        self.intersect(other).is_empty()
    }

    /// Disjointness of the open interiors; touching at an endpoint is fine.
    pub fn interiors_disjoint(&self, other: &Interval) -> bool {
        self.hi.cmp_exact(&other.lo) != Ordering::Greater || other.hi.cmp_exact(&self.lo) != Ordering::Greater
    }

    /// Image under `x ↦ slope·x + intercept`; a negative slope swaps the
    /// ends and their flags.
    pub fn affine_image(&self, slope: &ExactNumber, intercept: &ExactNumber) -> Interval {
        let a = slope * &self.lo + intercept;
        let b = slope * &self.hi + intercept;
        if slope.signum() >= 0 {
            Interval {
                lo: a,
                hi: b,
                lo_closed: self.lo_closed,
                hi_closed: self.hi_closed,
            }
        } else {
            Interval {
                lo: b,
                hi: a,
                lo_closed: self.hi_closed,
                hi_closed: self.lo_closed,
            }
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}
