//! Brute-force orbits: the ground truth the induction is checked against.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ggiet::{GGiet, Image, Slot};
use crate::intervals::{Interval, IntervalSet};
use crate::scalar::Scalar;

pub const DEFAULT_HORIZON: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// The orbit is finite: `l` forward and `m` backward iterates stay in the
    /// domain (resp. range) before the orbit ends in a gap.
    Transient {
        m: usize,
        l: usize,
    },
    Periodic {
        period: usize,
    },
    Undecided {
        horizon: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub seed: Scalar,
    /// `T(x), T²(x), ...`; for a transient orbit the last entry is in a top gap.
    pub forward: Vec<Scalar>,
    pub backward: Vec<Scalar>,
    pub classification: Classification,
    pub forward_exit_gap: Option<usize>,
    pub backward_exit_gap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    #[error("point {0} outside the ambient interval")]
    OutOfRange(Scalar),
    #[error("iterate {step} leaves the domain")]
    LeftDomain { step: usize },
}

/// Iterates `x` forward and backward up to `horizon` steps each.
///
/// A return to the seed is the only possible repetition because the map is
/// injective, so periodicity is detected by comparing with the seed.
pub fn classify_orbit(m: &GGiet, x: &Scalar, horizon: usize) -> Result<OrbitRecord, OrbitError> {
    if x.is_negative() || x >= m.ambient() {
        return Err(OrbitError::OutOfRange(x.clone()));
    }
    let mut forward = Vec::new();
    let mut forward_exit_gap = None;
    let mut period = None;
    let mut cur = x.clone();
    for _ in 0..horizon {
        match m.apply(&cur).expect("orbit stays in the ambient interval") {
            Image::Point(y) => {
                if &y == x {
                    period = Some(forward.len() + 1);
                    break;
                }
                forward.push(y.clone());
                cur = y;
            }
            Image::NotInDomain(g) => {
                forward_exit_gap = Some(g);
                break;
            }
        }
    }
    if let Some(p) = period {
        let mut backward = forward.clone();
        backward.reverse();
        return Ok(OrbitRecord {
            seed: x.clone(),
            forward,
            backward,
            classification: Classification::Periodic { period: p },
            forward_exit_gap: None,
            backward_exit_gap: None,
        });
    }
    let mut backward = Vec::new();
    let mut backward_exit_gap = None;
    let mut cur = x.clone();
    for _ in 0..horizon {
        match m.apply_inverse(&cur).expect("orbit stays in the ambient interval") {
            Image::Point(y) => {
                backward.push(y.clone());
                cur = y;
            }
            Image::NotInDomain(g) => {
                backward_exit_gap = Some(g);
                break;
            }
        }
    }
    let classification = match (forward_exit_gap, backward_exit_gap) {
        (Some(_), Some(_)) => {
            Classification::Transient { m: backward.len().saturating_sub(1), l: forward.len().saturating_sub(1) }
        }
        _ => Classification::Undecided { horizon },
    };
    Ok(OrbitRecord { seed: x.clone(), forward, backward, classification, forward_exit_gap, backward_exit_gap })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransitionVerdict {
    AllTransient,
    FoundNonTransient(Scalar),
    Undecided,
}

/// Sampled check that `m` is a domain of transition. A non-transient verdict
/// is only returned for a proven periodic orbit.
pub fn is_transition_domain(m: &GGiet, samples: &[Scalar], horizon: usize) -> TransitionVerdict {
    let mut undecided = false;
    for x in samples {
        match classify_orbit(m, x, horizon).map(|r| r.classification) {
            Ok(Classification::Periodic { .. }) => return TransitionVerdict::FoundNonTransient(x.clone()),
            Ok(Classification::Transient { .. }) => {}
            _ => undecided = true,
        }
    }
    if undecided {
        TransitionVerdict::Undecided
    } else {
        TransitionVerdict::AllTransient
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WanderingVerdict {
    DisjointUpTo(usize),
    OverlapAt(usize),
}

/// Image of a set; fails if part of it lies in a top gap.
pub fn image_set(m: &GGiet, s: &IntervalSet) -> Option<IntervalSet> {
    let mut out = Vec::new();
    for part in s.parts() {
        for (slot, p) in m.top().split(part) {
            match slot {
                Slot::Interval(l) => out.push(m.image_interval(&l, &p)),
                Slot::Gap(_) => return None,
            }
        }
        if part.hi > *m.ambient() {
            return None;
        }
    }
    Some(IntervalSet::from_intervals(out))
}

pub fn preimage_set(m: &GGiet, s: &IntervalSet) -> Option<IntervalSet> {
    image_set(&m.invert(), s)
}

/// Checks that the first `n` images (and/or preimages) of `j` are pairwise
/// disjoint. `OverlapAt(k)` names the first iterate meeting an earlier one;
/// for `Both`, `k` counts images first and then preimages.
pub fn check_wandering(
    m: &GGiet,
    j: &Interval,
    n: usize,
    direction: Direction,
) -> Result<WanderingVerdict, OrbitError> {
    let mut seen = vec![IntervalSet::from_interval(j.clone())];
    let run = |step_map: &dyn Fn(&IntervalSet) -> Option<IntervalSet>, seen: &mut Vec<IntervalSet>| {
        let mut cur = IntervalSet::from_interval(j.clone());
        for k in 1..=n {
            cur = step_map(&cur).ok_or(OrbitError::LeftDomain { step: k })?;
            if seen.iter().any(|s| !s.is_disjoint(&cur)) {
                return Ok(Some(k));
            }
            seen.push(cur.clone());
        }
        Ok(None)
    };
    let inv = m.invert();
    let fwd = |s: &IntervalSet| image_set(m, s);
    let bwd = |s: &IntervalSet| image_set(&inv, s);
    if matches!(direction, Direction::Forward | Direction::Both) {
        if let Some(k) = run(&fwd, &mut seen)? {
            return Ok(WanderingVerdict::OverlapAt(k));
        }
    }
    if matches!(direction, Direction::Backward | Direction::Both) {
        if let Some(k) = run(&bwd, &mut seen)? {
            return Ok(WanderingVerdict::OverlapAt(k));
        }
    }
    Ok(WanderingVerdict::DisjointUpTo(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerViolation {
    #[error("floor {level} of base {base} leaves the domain")]
    Escapes { base: usize, level: usize },
    #[error("floor {level_a} of base {base_a} overlaps floor {level_b} of base {base_b}")]
    Overlap { base_a: usize, level_a: usize, base_b: usize, level_b: usize },
    #[error("acceleration mismatch at {point} in base {base}")]
    Acceleration { base: usize, point: Scalar },
}

/// Points spread over a set: midpoints of a uniform refinement of each part
/// plus each left endpoint nudged right by a tiny rational.
pub fn sample_points(s: &IntervalSet, per_part: usize) -> Vec<Scalar> {
    let mut out = Vec::new();
    let nudge = Scalar::ratio(1, 1_000_003);
    for p in s.parts() {
        let len = p.length();
        for k in 0..per_part {
            let t = Scalar::ratio(2 * k as i64 + 1, 2 * per_part as i64);
            out.push(&p.lo + &t * &len);
        }
        out.push(&p.lo + &len * &nudge);
    }
    out
}

/// `T^n(x)`, if defined.
pub fn iterate_point(m: &GGiet, x: &Scalar, n: usize) -> Option<Scalar> {
    let mut cur = x.clone();
    for _ in 0..n {
        match m.apply(&cur).ok()? {
            Image::Point(y) => cur = y,
            Image::NotInDomain(_) => return None,
        }
    }
    Some(cur)
}

/// Checks a tower representation over bases `(interval, height)`: all floors
/// `T^i(base)`, `0 ≤ i < height`, lie in the domain and are pairwise disjoint.
/// When `accel` is given, `T^height` must agree with it on 5 points per base.
pub fn verify_tower(m: &GGiet, bases: &[(Interval, usize)], accel: Option<&GGiet>) -> Result<(), TowerViolation> {
    let domain = m.domain();
    let mut floors: Vec<(usize, usize, IntervalSet)> = Vec::new();
    for (bi, (base, h)) in bases.iter().enumerate() {
        let mut cur = IntervalSet::from_interval(base.clone());
        for level in 0..*h {
            if !domain.contains_set(&cur) {
                return Err(TowerViolation::Escapes { base: bi, level });
            }
            for (bj, lj, f) in &floors {
                if !f.is_disjoint(&cur) {
                    return Err(TowerViolation::Overlap { base_a: bi, level_a: level, base_b: *bj, level_b: *lj });
                }
            }
            floors.push((bi, level, cur.clone()));
            if level + 1 < *h {
                cur = image_set(m, &cur).ok_or(TowerViolation::Escapes { base: bi, level: level + 1 })?;
            }
        }
        if let Some(acc) = accel {
            for x in sample_points(&IntervalSet::from_interval(base.clone()), 4) {
                let direct = iterate_point(m, &x, *h);
                let claimed = match acc.apply(&x) {
                    Ok(Image::Point(y)) => Some(y),
                    _ => None,
                };
                if direct.is_none() || direct != claimed {
                    return Err(TowerViolation::Acceleration { base: bi, point: x });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Scalar {
        Scalar::ratio(p, q)
    }

    fn rot(a: Scalar) -> GGiet {
        let b = Scalar::one() - &a;
        GGiet::build(
            &[(Some("A"), b.clone()), (Some("B"), a.clone())],
            &[(Some("B"), a), (Some("A"), b)],
            &[("A", Scalar::one()), ("B", Scalar::one())],
        )
        .unwrap()
    }

    fn shift() -> GGiet {
        GGiet::build(
            &[(Some("A"), r(1, 2)), (None, r(1, 2))],
            &[(None, r(1, 2)), (Some("A"), r(1, 2))],
            &[("A", r(1, 1))],
        )
        .unwrap()
    }

    fn cyl() -> GGiet {
        GGiet::build(
            &[(None, r(1, 4)), (Some("A"), r(1, 2)), (None, r(1, 4))],
            &[(None, r(3, 8)), (Some("A"), r(1, 4)), (None, r(3, 8))],
            &[("A", r(1, 2))],
        )
        .unwrap()
    }

    fn golden() -> GGiet {
        let phi1 = Scalar::quadratic(
            num_rational::BigRational::new((-1).into(), 2.into()),
            num_rational::BigRational::new(1.into(), 2.into()),
            5,
        )
        .unwrap();
        rot(phi1)
    }

    #[test]
    fn classify_examples() {
        let r3 = rot(r(1, 3));
        assert_eq!(classify_orbit(&r3, &r(0, 1), 100).unwrap().classification, Classification::Periodic { period: 3 });
        let s = classify_orbit(&shift(), &r(1, 4), 100).unwrap();
        assert_eq!(s.classification, Classification::Transient { m: 0, l: 0 });
        assert_eq!(s.forward, vec![r(3, 4)]);
        assert_eq!(
            classify_orbit(&cyl(), &r(1, 2), 100).unwrap().classification,
            Classification::Periodic { period: 1 }
        );
        assert_eq!(
            classify_orbit(&cyl(), &r(1, 3), 50).unwrap().classification,
            Classification::Undecided { horizon: 50 }
        );
    }

    #[test]
    fn transition_domain_examples() {
        let samples: Vec<Scalar> = (0..20).map(|k| r(k, 40)).collect();
        assert_eq!(is_transition_domain(&shift(), &samples, 100), TransitionVerdict::AllTransient);
        assert_eq!(
            is_transition_domain(&cyl(), &[r(1, 3), r(1, 2)], 100),
            TransitionVerdict::FoundNonTransient(r(1, 2))
        );
        assert!(matches!(
            is_transition_domain(&rot(r(1, 3)), &[r(1, 7)], 100),
            TransitionVerdict::FoundNonTransient(_)
        ));
    }

    #[test]
    fn wandering_examples() {
        let j = Interval::new(r(0, 1), r(1, 10));
        assert_eq!(check_wandering(&rot(r(1, 3)), &j, 3, Direction::Forward).unwrap(), WanderingVerdict::OverlapAt(3));
        let j = Interval::new(r(0, 1), r(1, 100));
        assert_eq!(check_wandering(&golden(), &j, 50, Direction::Forward).unwrap(), WanderingVerdict::DisjointUpTo(50));
        let j = Interval::new(r(5, 16), r(3, 8));
        assert_eq!(check_wandering(&cyl(), &j, 5, Direction::Forward).unwrap(), WanderingVerdict::DisjointUpTo(5));
        let j = Interval::new(r(0, 1), r(1, 4));
        assert_eq!(check_wandering(&shift(), &j, 2, Direction::Forward), Err(OrbitError::LeftDomain { step: 2 }));
    }

    #[test]
    fn tower_examples() {
        let r3 = rot(r(1, 3));
        let base = Interval::new(r(0, 1), r(1, 3));
        assert_eq!(verify_tower(&r3, &[(base.clone(), 3)], None), Ok(()));
        assert!(matches!(
            verify_tower(&r3, &[(base, 4)], None),
            Err(TowerViolation::Overlap { level_a: 3, level_b: 0, .. })
        ));
        assert_eq!(verify_tower(&r3, &[], None), Ok(()));
    }

    #[test]
    fn inverse_mirrors_orbit() {
        let m = cyl();
        let x = r(1, 3);
        let a = classify_orbit(&m, &x, 20).unwrap();
        let b = classify_orbit(&m.invert(), &x, 20).unwrap();
        assert_eq!(a.forward, b.backward);
        assert_eq!(a.backward, b.forward);
    }
}
