//! Splitting the ambient interval into a transition part and recurrence
//! domains by repeated induction.
//!
//! Each basic step runs the induction on the current map until one of three
//! things is seen: a rightmost cylinder with equal right endpoints (a
//! singular pair), a recurrent set of winning letters (accumulation), or no
//! intervals left. The recurrent part `E_1` is recorded, and the scheme
//! continues on the induced map restricted to the complement of `E_1`.
//! Domains are finally rebuilt as towers over the original map.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ggiet::{CombData, GGiet, Image, Label};
use crate::induction::{
    classify_stability, cylinder_fixed_point, inf_complete, iterate_until, InductionError, InfComplete,
    PeriodicityCertificate, RVState, RenormLimit, Stability,
};
use crate::intervals::{Interval, IntervalSet};
use crate::orbit::{classify_orbit, sample_points, Classification};
use crate::scalar::Scalar;
use crate::towers::{build_tower_rep, TowerError, TowerRep};

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Induction(#[from] InductionError),
    #[error(transparent)]
    Giet(#[from] crate::ggiet::GietError),
    #[error("tower construction failed: {0}")]
    Tower(#[from] TowerError),
    #[error("regions of domains {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("permutation is reducible")]
    Reducible,
    #[error("permutation has gaps or mismatched lines")]
    NotAPermutation,
}

/// The rightmost letter when it is rightmost on both lines with a common
/// right endpoint.
fn singular_letter(m: &GGiet) -> Option<(Label, Interval, Interval)> {
    let (at, it) = m.top().rightmost_interval()?;
    let (ab, ib) = m.bottom().rightmost_interval()?;
    (at == ab && it.hi == ib.hi).then_some((at, it, ib))
}

#[derive(Debug, Clone)]
pub enum BasicOutcome {
    /// The rightmost letter `α` is a cylinder with equal right endpoints at
    /// step `n`; every recurrent orbit in `E_1 = I_α^t` is periodic, possibly
    /// at the right endpoint.
    SingularPair {
        e1: Interval,
        t1: GGiet,
        n: usize,
        label: Label,
        period: usize,
        anchor: Scalar,
        at_endpoint: bool,
        state: RVState,
    },
    Accumulated {
        e1: IntervalSet,
        t1: GGiet,
        l: RenormLimit,
        a_inf: BTreeSet<Label>,
        n: usize,
        certified: bool,
        state: RVState,
    },
    Trivialized {
        state: RVState,
    },
    Undecided {
        state: RVState,
    },
}

fn tops(m: &GGiet, letters: &BTreeSet<Label>) -> IntervalSet {
    IntervalSet::from_intervals(letters.iter().filter_map(|l| m.top_interval(l)).collect())
}

/// Runs the induction from `m` (with initial heights) until one of the three
/// outcomes is certain, or `max_steps` is reached; then the window heuristic
/// decides, uncertified.
pub fn basic_step(
    m: &GGiet,
    heights: BTreeMap<Label, usize>,
    window: usize,
    max_steps: usize,
) -> Result<BasicOutcome, DecomposeError> {
    let state = iterate_until(m, heights, max_steps, |st| {
        st.d() == 0
            || singular_letter(&st.current).is_some()
            || cylinder_fixed_point(&st.current).is_some()
            || st.certificate.is_some()
    })?;
    let cur = &state.current;
    if cur.d() == 0 {
        return Ok(BasicOutcome::Trivialized { state });
    }
    if let Some((label, it, ib)) = singular_letter(cur) {
        let at_endpoint = it.lo != ib.lo;
        let anchor = if at_endpoint { it.hi.clone() } else { it.lo.clone() };
        let t1 = cur.restrict(&IntervalSet::from_interval(it.clone()))?;
        let period = state.heights[&label];
        let n = state.n;
        return Ok(BasicOutcome::SingularPair { e1: it, t1, n, label, period, anchor, at_endpoint, state });
    }
    if let Some(c) = cylinder_fixed_point(cur) {
        let a_inf: BTreeSet<Label> = [c.label].into_iter().collect();
        let e1 = tops(cur, &a_inf);
        let t1 = cur.restrict(&e1)?;
        let l = RenormLimit::Exact { value: c.fixed_point, at_endpoint: false };
        let n = state.n;
        return Ok(BasicOutcome::Accumulated { e1, t1, l, a_inf, n, certified: true, state });
    }
    if let Some(c) = state.certificate.clone() {
        let Stability::Stable { a_inf, .. } = classify_stability(&state, window) else { unreachable!() };
        let at = &state.history[c.preperiod].map;
        let e1 = tops(at, &a_inf);
        let t1 = at.restrict(&e1)?;
        let l = RenormLimit::Exact { value: Scalar::zero(), at_endpoint: false };
        return Ok(BasicOutcome::Accumulated { e1, t1, l, a_inf, n: c.preperiod, certified: true, state });
    }
    match classify_stability(&state, window) {
        Stability::Stable { a_inf, .. } if !state.capped => {
            let e1 = tops(cur, &a_inf);
            let t1 = cur.restrict(&e1)?;
            let l = RenormLimit::Bracket { lo: Scalar::zero(), hi: state.r_top_history.last().unwrap().clone() };
            let n = state.n;
            Ok(BasicOutcome::Accumulated { e1, t1, l, a_inf, n, certified: false, state })
        }
        _ => Ok(BasicOutcome::Undecided { state }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WanderingDirection {
    ForwardOnly,
    BackwardOnly,
    Both,
    NoneDetected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationInfo {
    pub comb: CombData,
    pub gamma_prefix: Vec<Label>,
    pub reduced_prefix: Vec<Label>,
    pub certificate: Option<PeriodicityCertificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    Periodic {
        period: usize,
        anchor: Scalar,
        at_endpoint: bool,
    },
    Quasiminimal {
        d_i: usize,
        rotation: RotationInfo,
        inf_complete: InfComplete,
        wandering_direction: WanderingDirection,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainReport {
    pub kind: DomainKind,
    /// Union of the tower floors.
    pub region: Vec<Interval>,
    pub base: GGiet,
    pub heights: BTreeMap<Label, usize>,
    pub tower: TowerRep,
    /// Induction steps used by the basic step that found this domain.
    pub depth: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub thm13_lhs: usize,
    pub thm13_rhs: usize,
    pub satisfied_weak: bool,
    pub satisfied_strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settings {
    pub window: usize,
    pub max_steps: usize,
}

/// What was left when a basic step could not decide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unresolved {
    pub sub_map: GGiet,
    pub steps_run: usize,
    /// Part of the ambient interval swept by the sub-map's towers. It is
    /// neither transition nor a domain.
    pub region: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub input: GGiet,
    pub transition: Vec<Interval>,
    pub domains: Vec<DomainReport>,
    pub p: usize,
    pub q: usize,
    pub bounds: Bounds,
    pub ergodic_bound: usize,
    pub settings: Settings,
    pub certified: bool,
    pub basic_steps: usize,
    pub unresolved: Option<Unresolved>,
}

impl DecompositionReport {
    pub fn transition_set(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.transition.clone())
    }

    pub fn region_set(&self, i: usize) -> IntervalSet {
        IntervalSet::from_intervals(self.domains[i].region.clone())
    }
}

/// Compares floor widths along each tower: widths shrinking up a tower point
/// to intervals wandering forward, growing ones to intervals wandering back.
fn wandering_direction(tower: &TowerRep) -> WanderingDirection {
    let two = Scalar::from_int(2);
    let (mut fwd, mut bwd) = (false, false);
    for l in tower.heights.keys() {
        let ws: Vec<Scalar> = tower.floors.iter().filter(|f| &f.label == l).map(|f| f.interval.length()).collect();
        let (first, last) = (ws.first().unwrap(), ws.last().unwrap());
        if &(last * &two) < first {
            fwd = true;
        }
        if last > &(first * &two) {
            bwd = true;
        }
    }
    match (fwd, bwd) {
        (true, true) => WanderingDirection::Both,
        (true, false) => WanderingDirection::ForwardOnly,
        (false, true) => WanderingDirection::BackwardOnly,
        _ => WanderingDirection::NoneDetected,
    }
}

/// Runs the scheme: at most `d` basic steps.
pub fn decompose(m: &GGiet, window: usize, max_steps: usize) -> Result<DecompositionReport, DecomposeError> {
    let v = m.validate();
    if !v.is_empty() {
        return Err(InductionError::InvalidMap(v).into());
    }
    let d = m.d();
    let mut current = m.clone();
    let mut heights: BTreeMap<Label, usize> = m.alphabet().into_iter().map(|l| (l, 1)).collect();
    let mut domains: Vec<DomainReport> = Vec::new();
    let mut unresolved = None;
    let mut basic_steps = 0;
    while current.d() > 0 && basic_steps < d.max(1) {
        basic_steps += 1;
        let w = if window == 0 { crate::induction::default_window(current.d()) } else { window };
        let outcome = basic_step(&current, heights.clone(), w, max_steps)?;
        let (snapshot, e1, stop) = match outcome {
            BasicOutcome::Trivialized { .. } => break,
            BasicOutcome::Undecided { state } => {
                let region = build_tower_rep(m, &current, &heights).ok().map(|t| t.region().parts().to_vec());
                unresolved = Some((current.clone(), state.n, region));
                break;
            }
            BasicOutcome::SingularPair { e1, t1, n, period, anchor, at_endpoint, state, .. } => {
                let snap = &state.history[n];
                let h = t1.alphabet().into_iter().map(|l| (l.clone(), snap.heights[&l])).collect();
                let tower = build_tower_rep(m, &t1, &h)?;
                domains.push(DomainReport {
                    kind: DomainKind::Periodic { period, anchor, at_endpoint },
                    region: tower.region().parts().to_vec(),
                    base: t1,
                    heights: h,
                    tower,
                    depth: n,
                    certified: true,
                });
                let stop = snap.map.d() == 1;
                (snap.clone(), IntervalSet::from_interval(e1), stop)
            }
            BasicOutcome::Accumulated { e1, t1, l, a_inf, n, certified, state } => {
                let snap = &state.history[n];
                let h: BTreeMap<Label, usize> = a_inf.iter().map(|l| (l.clone(), snap.heights[l])).collect();
                let tower = build_tower_rep(m, &t1, &h)?;
                let kind = if a_inf.len() == 1 {
                    let label = a_inf.iter().next().unwrap();
                    let (anchor, at_endpoint) = match &l {
                        RenormLimit::Exact { value, at_endpoint } => (value.clone(), *at_endpoint),
                        RenormLimit::Bracket { hi, .. } => (hi.clone(), false),
                        RenormLimit::TransitionMarker { lambda } => (lambda.clone(), false),
                    };
                    DomainKind::Periodic { period: h[label], anchor, at_endpoint }
                } else {
                    let cut = state.n.min(n.max(1) + 64);
                    let steps = &state.steps[..cut];
                    let gamma_prefix = steps.iter().filter_map(|s| s.letter_winner.clone()).collect();
                    let reduced_prefix = steps
                        .iter()
                        .filter(|s| s.interval_vs_interval())
                        .filter_map(|s| s.letter_winner.clone())
                        .collect();
                    DomainKind::Quasiminimal {
                        d_i: a_inf.len(),
                        rotation: RotationInfo {
                            comb: t1.comb(),
                            gamma_prefix,
                            reduced_prefix,
                            certificate: state.certificate.clone(),
                        },
                        inf_complete: inf_complete(&state, w),
                        wandering_direction: wandering_direction(&tower),
                    }
                };
                domains.push(DomainReport {
                    kind,
                    region: tower.region().parts().to_vec(),
                    base: t1,
                    heights: h,
                    tower,
                    depth: n,
                    certified,
                });
                let stop = matches!(&l, RenormLimit::Exact { value, .. } if value.is_zero());
                (snap.clone(), e1, stop)
            }
        };
        if stop {
            break;
        }
        let rest = snapshot.map.domain().difference(&e1);
        current = snapshot.map.restrict(&rest)?;
        heights = current.alphabet().into_iter().map(|l| (l.clone(), snapshot.heights[&l])).collect();
    }

    for i in 0..domains.len() {
        for j in i + 1..domains.len() {
            let a = IntervalSet::from_intervals(domains[i].region.clone());
            let b = IntervalSet::from_intervals(domains[j].region.clone());
            if !a.is_disjoint(&b) {
                return Err(DecomposeError::Overlap(i, j));
            }
        }
    }
    let all = IntervalSet::from_intervals(domains.iter().flat_map(|d| d.region.clone()).collect());
    let rest = IntervalSet::from_interval(Interval::new(Scalar::zero(), m.ambient().clone())).difference(&all);
    let (transition, unresolved) = match unresolved {
        None => (rest, None),
        Some((sub_map, steps_run, region)) => {
            // without towers nothing outside the domains is known to be transient
            let u = region.map(IntervalSet::from_intervals).unwrap_or_else(|| rest.clone()).intersect(&rest);
            let t = rest.difference(&u);
            (t, Some(Unresolved { sub_map, steps_run, region: u.parts().to_vec() }))
        }
    };
    let p = domains.iter().filter(|d| matches!(d.kind, DomainKind::Periodic { .. })).count();
    let q = domains.len() - p;
    let rhs = d.saturating_sub(p) / 2;
    let ergodic_bound = domains
        .iter()
        .map(|d| match &d.kind {
            DomainKind::Quasiminimal { d_i, .. } => d_i / 2,
            _ => 0,
        })
        .sum();
    let certified = unresolved.is_none() && domains.iter().all(|d| d.certified);
    Ok(DecompositionReport {
        input: m.clone(),
        transition: transition.parts().to_vec(),
        domains,
        p,
        q,
        bounds: Bounds { thm13_lhs: q, thm13_rhs: rhs, satisfied_weak: q <= rhs, satisfied_strict: q < rhs },
        ergodic_bound,
        settings: Settings { window, max_steps },
        certified,
        basic_steps,
        unresolved,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub weak_ok: bool,
    pub strict_ok: bool,
    pub ergodic_ok: bool,
    /// Genus of each gapless quasiminimal base, where defined.
    pub genera: Vec<Option<usize>>,
    pub notes: Vec<String>,
}

pub fn check_bounds(rep: &DecompositionReport) -> BoundCheck {
    let b = &rep.bounds;
    let mut notes = Vec::new();
    if b.satisfied_weak && !b.satisfied_strict {
        notes.push(format!("strict form fails: q = {} is not below floor((d - p)/2) = {}", b.thm13_lhs, b.thm13_rhs));
    }
    let mut ergodic_ok = rep.q <= rep.ergodic_bound;
    let mut genera = Vec::new();
    for (i, d) in rep.domains.iter().enumerate() {
        if let DomainKind::Quasiminimal { d_i, .. } = &d.kind {
            let g = genus_of_permutation(&d.base.comb()).ok();
            if let Some(g) = g {
                if g > d_i / 2 {
                    ergodic_ok = false;
                    notes.push(format!("domain {}: genus {} exceeds floor({}/2)", i, g, d_i));
                }
            }
            genera.push(g);
        }
    }
    BoundCheck { weak_ok: b.satisfied_weak, strict_ok: b.satisfied_strict, ergodic_ok, genera, notes }
}

/// Genus of the translation surface suspending a gapless irreducible
/// permutation, from the cycles of the singularity permutation on the
/// `d + 1` interval endpoints.
pub fn genus_of_permutation(pi: &CombData) -> Result<usize, DecomposeError> {
    if pi.has_gaps() || pi.pi_top.keys().ne(pi.pi_bottom.keys()) {
        return Err(DecomposeError::NotAPermutation);
    }
    let d = pi.d();
    let top = pi.top_order();
    // p(j) = bottom position of the j-th top letter, 1-based
    let p: Vec<usize> = std::iter::once(0).chain(top.iter().map(|l| pi.pi_bottom[l])).collect();
    let mut inv = vec![0; d + 1];
    for j in 1..=d {
        inv[p[j]] = j;
    }
    for k in 1..d {
        let head: BTreeSet<usize> = (1..=k).map(|j| p[j]).collect();
        if head == (1..=k).collect() {
            return Err(DecomposeError::Reducible);
        }
    }
    let sigma = |j: usize| -> usize {
        if j == 0 {
            inv[1] - 1
        } else if p[j] == d {
            d
        } else {
            inv[p[j] + 1] - 1
        }
    };
    let mut seen = vec![false; d + 1];
    let mut cycles = 0;
    for s in 0..=d {
        if seen[s] {
            continue;
        }
        cycles += 1;
        let mut j = s;
        while !seen[j] {
            seen[j] = true;
            j = sigma(j);
        }
    }
    Ok((d + 1 - cycles) / 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub point: Scalar,
    /// `None` for the transition part, else the domain index.
    pub domain: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub samples: usize,
    /// Samples whose orbit was not resolved within the horizon where a
    /// resolution was expected (not a contradiction).
    pub inconclusive: usize,
    pub contradictions: Vec<Contradiction>,
}

impl ValidationSummary {
    pub fn clean(&self) -> bool {
        self.contradictions.is_empty()
    }
}

fn spread(set: &IntervalSet, n: usize) -> Vec<Scalar> {
    if set.is_empty() || n == 0 {
        return Vec::new();
    }
    let per = n.div_ceil(set.parts().len()).max(1);
    let mut v = sample_points(set, per);
    v.truncate(n);
    v
}

/// How a one-sided orbit walk ended.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Walk {
    /// Fell into a gap after this many steps.
    Ended(usize),
    /// Entered an invariant trap after this many steps.
    Trapped(usize),
    /// Came back to the seed.
    Periodic(usize),
    Horizon,
}

struct Walked {
    end: Walk,
    points: Vec<Scalar>,
}

fn walk(m: &GGiet, x: &Scalar, forward: bool, horizon: usize, trap: &IntervalSet) -> Walked {
    let mut points = Vec::new();
    let mut cur = x.clone();
    for i in 1..=horizon {
        let img = if forward { m.apply(&cur) } else { m.apply_inverse(&cur) };
        match img.expect("orbit stays in the ambient interval") {
            Image::Point(y) => {
                if &y == x {
                    return Walked { end: Walk::Periodic(i), points };
                }
                let trapped = trap.contains(&y);
                points.push(y.clone());
                if trapped {
                    return Walked { end: Walk::Trapped(i), points };
                }
                cur = y;
            }
            Image::NotInDomain(_) => return Walked { end: Walk::Ended(i - 1), points },
        }
    }
    Walked { end: Walk::Horizon, points }
}

/// Overlaps `I^t ∩ I^b` of periodic bases whose branch contracts (forward
/// invariant) or expands (backward invariant).
fn traps(rep: &DecompositionReport) -> (IntervalSet, IntervalSet) {
    let (mut fwd, mut bwd) = (Vec::new(), Vec::new());
    for d in &rep.domains {
        if !matches!(d.kind, DomainKind::Periodic { .. }) {
            continue;
        }
        for l in d.base.alphabet() {
            let (t, b) = (d.base.top_interval(&l).unwrap(), d.base.bottom_interval(&l).unwrap());
            let Some(o) = t.intersect(&b) else { continue };
            let lam = d.base.slope(&l).unwrap();
            match lam.cmp(&Scalar::one()) {
                std::cmp::Ordering::Less => fwd.push(o),
                std::cmp::Ordering::Greater => bwd.push(o),
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    (IntervalSet::from_intervals(fwd), IntervalSet::from_intervals(bwd))
}

/// Samples every part of the report and checks it against brute-force orbits.
///
/// Transition points must be transient for the map induced on the
/// transition part: their orbits may not come back to it after `horizon/2`
/// steps in either direction, and they may not be periodic through it.
/// Points of a periodic domain whose base branch is the identity must be
/// periodic with the reported period; for other bases the anchor must be,
/// and samples may not be transient. Quasiminimal points must be
/// non-periodic and stay in their region up to the horizon.
///
/// Orbit walks stop early on entering the invariant overlap of a contracting
/// (forward) or expanding (backward) periodic base, since they cannot leave
/// it again.
pub fn cross_validate(rep: &DecompositionReport, samples_per_region: usize, horizon: usize) -> ValidationSummary {
    let m = &rep.input;
    let (ftrap, btrap) = traps(rep);
    let mut out = ValidationSummary { samples: 0, inconclusive: 0, contradictions: Vec::new() };
    let bad =
        |point: &Scalar, domain: Option<usize>, reason: String| Contradiction { point: point.clone(), domain, reason };
    let dset = rep.transition_set();
    for x in spread(&dset, samples_per_region) {
        out.samples += 1;
        let f = walk(m, &x, true, horizon, &ftrap);
        if let Walk::Periodic(p) = f.end {
            if f.points.iter().chain([&x]).any(|y| dset.contains(y)) {
                out.contradictions.push(bad(
                    &x,
                    None,
                    format!("periodic orbit of period {} meets the transition part", p),
                ));
            }
            continue;
        }
        let b = walk(m, &x, false, horizon, &btrap);
        let late = |w: &Walked| {
            w.end == Walk::Horizon
                && w.points.iter().rposition(|y| dset.contains(y)).is_some_and(|i| i + 1 > horizon / 2)
        };
        if late(&f) || late(&b) {
            out.contradictions.push(bad(&x, None, "returns to the transition part late in the orbit".into()));
        }
    }
    for (i, d) in rep.domains.iter().enumerate() {
        let region = IntervalSet::from_intervals(d.region.clone());
        let pts = spread(&region, samples_per_region);
        match &d.kind {
            DomainKind::Periodic { period, anchor, at_endpoint } => {
                let (lam, delta) = d.base.branch(d.base.alphabet().iter().next().unwrap()).unwrap();
                let identity = lam == Scalar::one() && delta.is_zero();
                if !identity && !at_endpoint {
                    out.samples += 1;
                    match classify_orbit(m, anchor, period + 1).map(|r| r.classification) {
                        Ok(Classification::Periodic { period: p }) if p == *period => {}
                        other => out.contradictions.push(bad(
                            anchor,
                            Some(i),
                            format!("anchor: expected period {}, got {:?}", period, other),
                        )),
                    }
                }
                for x in pts {
                    out.samples += 1;
                    if identity {
                        match classify_orbit(m, &x, period + 1).unwrap().classification {
                            Classification::Periodic { period: p } if p == *period => {}
                            c => out.contradictions.push(bad(
                                &x,
                                Some(i),
                                format!("expected period {}, got {:?}", period, c),
                            )),
                        }
                        continue;
                    }
                    let f = walk(m, &x, true, horizon, &ftrap);
                    let b = walk(m, &x, false, horizon, &btrap);
                    match (&f.end, &b.end) {
                        (Walk::Ended(_), Walk::Ended(_)) => {
                            out.contradictions.push(bad(&x, Some(i), "transient point in a periodic domain".into()))
                        }
                        (Walk::Horizon, _) | (_, Walk::Horizon) => out.inconclusive += 1,
                        _ => {}
                    }
                }
            }
            DomainKind::Quasiminimal { .. } => {
                for x in pts {
                    out.samples += 1;
                    let f = walk(m, &x, true, horizon, &IntervalSet::empty());
                    match f.end {
                        Walk::Periodic(p) => {
                            out.contradictions.push(bad(&x, Some(i), format!("periodic with period {}", p)))
                        }
                        Walk::Ended(k) => {
                            out.contradictions.push(bad(&x, Some(i), format!("forward orbit ends after {} steps", k)))
                        }
                        _ => {
                            if let Some(k) = f.points.iter().position(|y| !region.contains(y)) {
                                out.contradictions.push(bad(
                                    &x,
                                    Some(i),
                                    format!("leaves the region at step {}", k + 1),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}
