//! Right-open intervals and finite unions of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// The right-open interval `[lo, hi)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Scalar,
    pub hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Self {
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn length(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = Scalar::max_of(&self.lo, &other.lo);
        let hi = Scalar::min_of(&self.hi, &other.hi);
        if lo < hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.intersect(other).is_some()
    }

    pub fn midpoint(&self) -> Scalar {
        (&self.lo + &self.hi) / Scalar::from_int(2)
    }

    /// The point `lo + t·(hi - lo)`.
    pub fn lerp(&self, t: &Scalar) -> Scalar {
        &self.lo + t * self.length()
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A finite union of right-open intervals, kept sorted, disjoint and with
/// touching pieces merged.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn from_interval(i: Interval) -> Self {
        Self::from_intervals(vec![i])
    }

    pub fn from_intervals(mut v: Vec<Interval>) -> Self {
        v.retain(|i| !i.is_empty());
        v.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut parts: Vec<Interval> = Vec::with_capacity(v.len());
        for i in v {
            match parts.last_mut() {
                Some(last) if i.lo <= last.hi => {
                    if i.hi > last.hi {
                        last.hi = i.hi;
                    }
                }
                _ => parts.push(i),
            }
        }
        IntervalSet { parts }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> Scalar {
        self.parts.iter().map(|i| i.length()).sum()
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        self.parts.iter().any(|i| i.contains(x))
    }

    pub fn contains_interval(&self, j: &Interval) -> bool {
        j.is_empty() || self.parts.iter().any(|i| i.contains_interval(j))
    }

    pub fn contains_set(&self, other: &IntervalSet) -> bool {
        other.parts.iter().all(|j| self.contains_interval(j))
    }

    pub fn sup(&self) -> Option<&Scalar> {
        self.parts.last().map(|i| &i.hi)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut v = self.parts.clone();
        v.extend(other.parts.iter().cloned());
        Self::from_intervals(v)
    }

    pub fn intersect_interval(&self, j: &Interval) -> IntervalSet {
        IntervalSet { parts: self.parts.iter().filter_map(|i| i.intersect(j)).collect() }
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut v = Vec::new();
        for j in &other.parts {
            v.extend(self.parts.iter().filter_map(|i| i.intersect(j)));
        }
        Self::from_intervals(v)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for i in &self.parts {
            let mut cur = i.lo.clone();
            for j in &other.parts {
                if j.hi <= cur || j.lo >= i.hi {
                    continue;
                }
                if j.lo > cur {
                    out.push(Interval::new(cur.clone(), j.lo.clone()));
                }
                if j.hi > cur {
                    cur = j.hi.clone();
                }
            }
            if cur < i.hi {
                out.push(Interval::new(cur, i.hi.clone()));
            }
        }
        Self::from_intervals(out)
    }

    pub fn is_disjoint(&self, other: &IntervalSet) -> bool {
        self.intersect(other).is_empty()
    }
}
