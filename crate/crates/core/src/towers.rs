//! Tower representations over a base map and the order of their floors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ggiet::{GGiet, GietError, Item, Label, Layout, Slot};
use crate::induction::{inf_complete, iterate, InfComplete, Player, RVState, RVStep};
use crate::intervals::{Interval, IntervalSet};
use crate::orbit::{verify_tower, TowerViolation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Floor {
    pub label: Label,
    pub level: usize,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerRep {
    pub base: GGiet,
    pub heights: BTreeMap<Label, usize>,
    /// Floors of each tower in order of level, towers in base label order.
    pub floors: Vec<Floor>,
    /// Left-to-right rank of each floor.
    #[serde(with = "ord_entries")]
    pub ord: BTreeMap<(Label, usize), usize>,
}

// JSON objects need string keys, so the rank map goes out as
// `[label, level, rank]` triples.
mod ord_entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<(Label, usize), usize>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|((l, k), r)| (l, k, r)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(Label, usize), usize>, D::Error> {
        let v: Vec<(Label, usize, usize)> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|(l, k, r)| ((l, k), r)).collect())
    }
}

#[derive(Debug, Error)]
pub enum TowerError {
    #[error("base interval {0} is not inside a single interval of the ambient map")]
    NotInAmbient(Label),
    #[error("height of {0} must be at least 1")]
    ZeroHeight(Label),
    #[error("missing height for {0}")]
    MissingHeight(Label),
    #[error("floor {1} over {0} is not inside a single branch")]
    Escape(Label, usize),
    #[error("floors ({0}, {1}) and ({2}, {3}) overlap")]
    Overlap(Label, usize, Label, usize),
    #[error("tower check failed: {0}")]
    Verify(#[from] TowerViolation),
    #[error("shape mismatch")]
    Shape,
}

impl TowerRep {
    /// Union of all floors.
    pub fn region(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.floors.iter().map(|f| f.interval.clone()).collect())
    }

    pub fn floor(&self, label: &str, level: usize) -> Option<&Floor> {
        self.floors.iter().find(|f| f.label == label && f.level == level)
    }
}

/// The branch label of `m` whose top interval contains `j`.
fn branch_of(m: &GGiet, j: &Interval) -> Option<Label> {
    match m.top().split(j).as_slice() {
        [(Slot::Interval(l), _)] => Some(l.clone()),
        _ => None,
    }
}

/// Floors `T^i(I_β)` for `0 ≤ i < n_β` over each base letter `β`, computed with
/// the ambient map, then checked with [`verify_tower`] (including the
/// acceleration `T^{n_β} = T̃` on the base).
pub fn build_tower_rep(
    ambient: &GGiet,
    base: &GGiet,
    heights: &BTreeMap<Label, usize>,
) -> Result<TowerRep, TowerError> {
    let mut floors: Vec<Floor> = Vec::new();
    let mut bases = Vec::new();
    for (l, b) in base.top().intervals() {
        let h = *heights.get(&l).ok_or_else(|| TowerError::MissingHeight(l.clone()))?;
        if h == 0 {
            return Err(TowerError::ZeroHeight(l));
        }
        if branch_of(ambient, &b).is_none() {
            return Err(TowerError::NotInAmbient(l));
        }
        let mut cur = b.clone();
        for level in 0..h {
            let br = branch_of(ambient, &cur).ok_or_else(|| TowerError::Escape(l.clone(), level))?;
            for f in &floors {
                if f.interval.overlaps(&cur) {
                    return Err(TowerError::Overlap(f.label.clone(), f.level, l.clone(), level));
                }
            }
            floors.push(Floor { label: l.clone(), level, interval: cur.clone() });
            cur = ambient.image_interval(&br, &cur);
        }
        bases.push((b, h));
    }
    verify_tower(ambient, &bases, Some(base))?;
    let mut by_pos: Vec<&Floor> = floors.iter().collect();
    by_pos.sort_by(|a, b| a.interval.lo.cmp(&b.interval.lo));
    let ord = by_pos.iter().enumerate().map(|(i, f)| ((f.label.clone(), f.level), i)).collect();
    Ok(TowerRep { base: base.clone(), heights: heights.clone(), floors, ord })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderComparison {
    SameOrder,
    DifferAt(Label, usize),
}

pub fn compare_orders(a: &TowerRep, b: &TowerRep) -> Result<OrderComparison, TowerError> {
    if a.heights != b.heights || a.ord.len() != b.ord.len() {
        return Err(TowerError::Shape);
    }
    for (k, ra) in &a.ord {
        match b.ord.get(k) {
            None => return Err(TowerError::Shape),
            Some(rb) if rb != ra => return Ok(OrderComparison::DifferAt(k.0.clone(), k.1)),
            _ => {}
        }
    }
    Ok(OrderComparison::SameOrder)
}

/// A finite-depth check that a map is semi-conjugate to a standard interval
/// exchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemiconjugacyWitness {
    /// The interval exchange with the same permutation following the same
    /// Rauzy path.
    pub target: GGiet,
    /// Number of interval-vs-interval steps replayed.
    pub path_len: usize,
    pub marked_label: Label,
    pub orbit: Vec<Scalar>,
    pub target_orbit: Vec<Scalar>,
    pub towers: OrderComparison,
}

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("orbit points {0} and {1} are ordered differently")]
    OrderMismatch(usize, usize),
    #[error("orbit of the marked point leaves the domain at step {0}")]
    LeftDomain(usize),
    #[error("no Rauzy steps to replay")]
    EmptyPath,
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Induction(#[from] crate::induction::InductionError),
    #[error(transparent)]
    Giet(#[from] GietError),
}

/// `(winner, loser)` at each interval-vs-interval step.
fn rauzy_path(steps: &[RVStep]) -> Vec<(Label, Label)> {
    steps
        .iter()
        .filter(|s| s.interval_vs_interval())
        .map(|s| match (&s.winner, &s.loser) {
            (Some(Player::Interval(w, _)), Some(Player::Interval(l, _))) => (w.clone(), l.clone()),
            _ => unreachable!(),
        })
        .collect()
}

/// Lengths that realize `path` from the given permutation: `(1, …, 1)` after
/// the last step, pulled back through each elementary matrix.
pub fn pullback_lengths(alphabet: &BTreeSet<Label>, path: &[(Label, Label)]) -> BTreeMap<Label, Scalar> {
    pull_back(alphabet.iter().map(|l| (l.clone(), Scalar::one())).collect(), path)
}

fn pull_back(mut len: BTreeMap<Label, Scalar>, path: &[(Label, Label)]) -> BTreeMap<Label, Scalar> {
    for (w, l) in path.iter().rev() {
        let add = len[l].clone();
        *len.get_mut(w).unwrap() = &len[w] + &add;
    }
    let total: Scalar = len.values().cloned().sum();
    len.values_mut().for_each(|v| *v = &*v / &total);
    len
}

/// `k·√s` with `s` square-free, for `n ≥ 0` small enough to factor.
fn int_sqrt(n: u64) -> Option<Scalar> {
    let (mut k, mut rest) = (1u64, n);
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest && p < 1 << 20 {
        while rest % (p * p) == 0 {
            rest /= p * p;
            k *= p;
        }
        p += 1;
    }
    let k = Scalar::from_int(i64::try_from(k).ok()?);
    let root = (rest as f64).sqrt().round() as u64;
    if root * root == rest {
        Some(k * Scalar::from_int(i64::try_from(root).ok()?))
    } else if crate::scalar::is_square_free(rest) {
        Some(k * Scalar::sqrt_of(rest).ok()?)
    } else {
        None
    }
}

/// Perron eigenvector of the matrix of a two-letter Rauzy loop, which the
/// loop maps to a multiple of itself.
pub fn perron_lengths_2(alphabet: &BTreeSet<Label>, period: &[(Label, Label)]) -> Option<BTreeMap<Label, Scalar>> {
    let ls: Vec<&Label> = alphabet.iter().collect();
    if ls.len() != 2 || period.is_empty() {
        return None;
    }
    let idx = |l: &Label| ls.iter().position(|x| *x == l).unwrap();
    // old lengths = m · new lengths
    let mut m = [[1i64, 0], [0, 1]];
    for (w, l) in period {
        let (w, l) = (idx(w), idx(l));
        for row in m.iter_mut() {
            row[l] = row[l].checked_add(row[w])?;
        }
    }
    let tr = m[0][0].checked_add(m[1][1])?;
    let det = m[0][0].checked_mul(m[1][1])?.checked_sub(m[0][1].checked_mul(m[1][0])?)?;
    let disc = tr.checked_mul(tr)?.checked_sub(det.checked_mul(4)?)?;
    let theta = (Scalar::from_int(tr) + int_sqrt(u64::try_from(disc).ok()?)?) / Scalar::from_int(2);
    let v = if m[0][1] != 0 {
        [Scalar::from_int(m[0][1]), &theta - &Scalar::from_int(m[0][0])]
    } else {
        [&theta - &Scalar::from_int(m[1][1]), Scalar::from_int(m[1][0])]
    };
    if !v.iter().all(|x| x.is_positive()) {
        return None;
    }
    let total = &v[0] + &v[1];
    Some(ls.into_iter().cloned().zip(v.iter().map(|x| x / &total)).collect())
}

fn forward_orbit(m: &GGiet, x: &Scalar, n: usize) -> Result<Vec<Scalar>, WitnessError> {
    let mut out = vec![x.clone()];
    for i in 0..n {
        match m.apply(out.last().unwrap()) {
            Ok(crate::ggiet::Image::Point(y)) => out.push(y),
            _ => return Err(WitnessError::LeftDomain(i + 1)),
        }
    }
    Ok(out)
}

/// Checks that `x_i < x_j` implies `y_i ≤ y_j` for all pairs.
pub fn orbit_orders_match(xs: &[Scalar], ys: &[Scalar]) -> Result<(), (usize, usize)> {
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            if xs[i] < xs[j] && ys[i] > ys[j] {
                return Err((i, j));
            }
        }
    }
    Ok(())
}

/// Replays the reduced winner stream on a standard interval exchange with the
/// same permutation and compares orbit and floor orders.
///
/// With a periodicity certificate the path is extended periodically to at
/// least `depth` steps; on two letters the lengths are then the exact Perron
/// vector of the loop. Requires a stable, ∞-complete run with no deletions
/// and at least two letters.
pub fn semiconjugacy_witness(m: &GGiet, state: &RVState, depth: usize) -> Result<SemiconjugacyWitness, WitnessError> {
    let window = crate::induction::default_window(state.d());
    match inf_complete(state, window) {
        InfComplete::Yes { .. } => {}
        other => return Err(WitnessError::Precondition(format!("rotation number not infinite complete: {:?}", other))),
    }
    if state.d() < 2 {
        return Err(WitnessError::Precondition("needs at least two letters".into()));
    }
    if state.steps.iter().any(|s| s.case.deletes()) {
        return Err(WitnessError::Precondition("letters were deleted along the run".into()));
    }
    let own = rauzy_path(&state.steps);
    let mut path = own.clone();
    if let Some(c) = &state.certificate {
        let period = rauzy_path(&state.steps[c.preperiod..c.preperiod + c.period]);
        while !period.is_empty() && path.len() < depth.max(2 * period.len()) {
            path.extend(period.iter().cloned());
        }
    }
    if path.is_empty() {
        return Err(WitnessError::EmptyPath);
    }
    let comb = m.comb();
    let exact = state.certificate.as_ref().and_then(|c| {
        let period = rauzy_path(&state.steps[c.preperiod..c.preperiod + c.period]);
        let v = perron_lengths_2(&m.alphabet(), &period)?;
        let prefix = rauzy_path(&state.steps[..c.preperiod]);
        Some(pull_back(v, &prefix))
    });
    let lens = exact.unwrap_or_else(|| pullback_lengths(&m.alphabet(), &path));
    let line = |order: Vec<Label>| {
        Layout::new(order.into_iter().map(|l| Item::interval(l.clone(), lens[&l].clone())).collect())
    };
    let target = GGiet::from_layouts(line(comb.top_order())?, line(comb.bottom_order())?)?;

    let marked_label = comb.top_order()[0].clone();
    let x0 = m.top_interval(&marked_label).unwrap().lo;
    let y0 = target.top_interval(&marked_label).unwrap().lo;
    let orbit = forward_orbit(m, &x0, depth)?;
    let target_orbit = forward_orbit(&target, &y0, depth)?;
    orbit_orders_match(&orbit, &target_orbit).map_err(|(i, j)| WitnessError::OrderMismatch(i, j))?;

    // towers at the last step both runs share
    let k = own.len();
    let n_m = state
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| s.interval_vs_interval())
        .nth(k - 1)
        .map(|(i, _)| i + 1)
        .unwrap();
    let tstate = iterate(&target, k)?;
    let rep_m = build_tower_rep(m, &state.history[n_m].map, &state.history[n_m].heights)?;
    let snap = &tstate.history[k];
    let rep_t = build_tower_rep(&target, &snap.map, &snap.heights)?;
    let towers = compare_orders(&rep_m, &rep_t)?;
    Ok(SemiconjugacyWitness { target, path_len: path.len(), marked_label, orbit, target_orbit, towers })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Scalar {
        Scalar::ratio(p, q)
    }

    fn rotation_third() -> GGiet {
        GGiet::build(
            &[(Some("A"), r(2, 3)), (Some("B"), r(1, 3))],
            &[(Some("B"), r(1, 3)), (Some("A"), r(2, 3))],
            &[("A", r(1, 1)), ("B", r(1, 1))],
        )
        .unwrap()
    }

    #[test]
    fn rotation_tower_over_identity() {
        let m = rotation_third();
        let base = GGiet::build(
            &[(Some("A"), r(1, 3)), (None, r(2, 3))],
            &[(Some("A"), r(1, 3)), (None, r(2, 3))],
            &[("A", r(1, 1))],
        )
        .unwrap();
        let h = [("A".to_string(), 3)].into_iter().collect();
        let rep = build_tower_rep(&m, &base, &h).unwrap();
        let got: Vec<_> = rep.floors.iter().map(|f| f.interval.clone()).collect();
        let want: Vec<_> = (0..3).map(|i| Interval::new(r(i, 3), r(i + 1, 3))).collect();
        assert_eq!(got, want);
        assert_eq!(rep.ord[&("A".to_string(), 2)], 2);
        assert_eq!(rep.region(), IntervalSet::from_interval(Interval::new(r(0, 1), r(1, 1))));
        assert_eq!(compare_orders(&rep, &rep).unwrap(), OrderComparison::SameOrder);

        let mut swapped = rep.clone();
        swapped.ord.insert(("A".into(), 0), 1);
        swapped.ord.insert(("A".into(), 1), 0);
        assert_eq!(compare_orders(&rep, &swapped).unwrap(), OrderComparison::DifferAt("A".into(), 0));

        // wrong height: T^2 is not the identity
        let h2 = [("A".to_string(), 2)].into_iter().collect();
        assert!(build_tower_rep(&m, &base, &h2).is_err());
    }

    #[test]
    fn height_one_is_the_base() {
        let m = rotation_third();
        let h = [("A".to_string(), 1), ("B".to_string(), 1)].into_iter().collect();
        let rep = build_tower_rep(&m, &m, &h).unwrap();
        assert_eq!(rep.floors.len(), 2);
        assert!(rep.floors.iter().all(|f| f.level == 0));
    }

    #[test]
    fn pullback_is_realized() {
        // golden-like path: A, B alternate
        let alphabet: BTreeSet<Label> = ["A".to_string(), "B".to_string()].into_iter().collect();
        let path = vec![("A".to_string(), "B".to_string()), ("B".to_string(), "A".to_string())];
        let l = pullback_lengths(&alphabet, &path);
        assert_eq!(l["A"], r(3, 5));
        assert_eq!(l["B"], r(2, 5));
        let m = GGiet::build(
            &[(Some("A"), r(3, 5)), (Some("B"), r(2, 5))],
            &[(Some("B"), r(2, 5)), (Some("A"), r(3, 5))],
            &[("A", r(1, 1)), ("B", r(1, 1))],
        )
        .unwrap();
        let st = iterate(&m, 2).unwrap();
        assert_eq!(rauzy_path(&st.steps), path);
    }

    #[test]
    fn golden_is_its_own_target() {
        let phi = (Scalar::one() + Scalar::sqrt_of(5).unwrap()) / Scalar::from_int(2);
        let (a, b) = (Scalar::from_int(2) - &phi, &phi - Scalar::one());
        let m = GGiet::build(
            &[(Some("A"), a.clone()), (Some("B"), b.clone())],
            &[(Some("B"), b), (Some("A"), a)],
            &[("A", r(1, 1)), ("B", r(1, 1))],
        )
        .unwrap();
        let st = iterate(&m, 10).unwrap();
        assert!(st.certificate.is_some());
        let w = semiconjugacy_witness(&m, &st, 30).unwrap();
        assert_eq!(w.target, m);
        assert_eq!(w.orbit, w.target_orbit);
    }
}
