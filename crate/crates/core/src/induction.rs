//! Gap-aware Rauzy–Veech induction.
//!
//! One step compares the rightmost top interval `I_{α_t}^t = [l^t, r^t)` with
//! the rightmost bottom interval `I_{α_b}^b = [l^b, r^b)` and replaces `T` by
//! its first return map to `[0, λ^(1))`. The formulas are in [`rv_step`]; the
//! first return oracle in [`rv_step_oracle_check`] recomputes the same map
//! from scratch.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ggiet::{CombData, GGiet, GietError, Label, Violation};
use crate::intervals::Interval;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Top,
    Bottom,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Interval(Label, Side),
    Gap(Side),
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |s: &Side| match s {
            Side::Top => "top",
            Side::Bottom => "bottom",
        };
        match self {
            Player::Interval(l, side) => write!(f, "{} ({})", l, s(side)),
            Player::Gap(side) => write!(f, "gap ({})", s(side)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Case {
    #[serde(rename = "1a")]
    OneA,
    /// `α_t = α_b`, equal right endpoints, different left endpoints. Every
    /// point of the letter converges to the common right endpoint without
    /// returning, so the letter is deleted.
    #[serde(rename = "1a-cyl")]
    OneACylinder,
    #[serde(rename = "1b")]
    OneB,
    #[serde(rename = "2a")]
    TwoA,
    #[serde(rename = "2b")]
    TwoB,
    #[serde(rename = "2boundary")]
    TwoBoundary,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::OneA => "1a",
            Case::OneACylinder => "1a-cyl",
            Case::OneB => "1b",
            Case::TwoA => "2a",
            Case::TwoB => "2b",
            Case::TwoBoundary => "2boundary",
        }
    }

    /// Cases that remove a letter.
    pub fn deletes(&self) -> bool {
        matches!(self, Case::OneACylinder | Case::OneB | Case::TwoB | Case::TwoBoundary)
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bookkeeping for one elementary step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RVStep {
    pub case: Case,
    /// `None` in case 1b.
    pub winner: Option<Player>,
    pub loser: Option<Player>,
    pub lambda1: Scalar,
    /// Label of the winning interval, when an interval wins.
    pub letter_winner: Option<Label>,
    pub deleted: Option<Label>,
    pub d_before: usize,
}

impl RVStep {
    /// Interval against interval (goes into the reduced stream).
    pub fn interval_vs_interval(&self) -> bool {
        matches!((&self.winner, &self.loser), (Some(Player::Interval(..)), Some(Player::Interval(..))))
    }
}

#[derive(Debug, Error)]
pub enum InductionError {
    #[error("invalid map: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidMap(Vec<Violation>),
    #[error("map has no intervals")]
    Empty,
    #[error(transparent)]
    Giet(#[from] GietError),
    #[error("state is not stable")]
    NotStable,
}

/// Why the induction cannot continue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// `d = 1` and the last letter would be deleted in case 1b or 1a-cyl:
    /// the map is a cylinder whose right endpoint is fixed.
    LastLetter(RVStep),
    /// No intervals left.
    Empty,
}

#[derive(Debug, Clone)]
pub enum StepOutcome {
    Advanced(RVStep, GGiet),
    Stopped(StopReason),
}

fn endpoints(m: &GGiet) -> Option<((Label, Interval), (Label, Interval))> {
    Some((m.top().rightmost_interval()?, m.bottom().rightmost_interval()?))
}

/// The step and the induced map, without stopping rules. Requires `d ≥ 1`.
fn raw_step(m: &GGiet) -> Result<(RVStep, GGiet), InductionError> {
    let ((at, it), (ab, ib)) = endpoints(m).ok_or(InductionError::Empty)?;
    let d = m.d();
    let mut pieces: Vec<(Label, Interval, Interval)> = m
        .top()
        .intervals()
        .into_iter()
        .map(|(l, t)| {
            let b = m.bottom_interval(&l).expect("validated map");
            (l, t, b)
        })
        .collect();
    let set = |pieces: &mut Vec<(Label, Interval, Interval)>, l: &str, t: Interval, b: Interval| {
        let p = pieces.iter_mut().find(|p| p.0 == l).expect("letter present");
        p.1 = t;
        p.2 = b;
    };
    let drop = |pieces: &mut Vec<(Label, Interval, Interval)>, l: &str| pieces.retain(|p| p.0 != l);
    let top = |l: &Label| Player::Interval(l.clone(), Side::Top);
    let bot = |l: &Label| Player::Interval(l.clone(), Side::Bottom);

    let step;
    if it.hi == ib.hi {
        let lam = Scalar::max_of(&it.lo, &ib.lo);
        if at == ab {
            let (case, winner, loser) = if it.lo == ib.lo {
                (Case::OneB, None, None)
            } else if it.lo < ib.lo {
                (Case::OneACylinder, Some(top(&at)), Some(bot(&at)))
            } else {
                (Case::OneACylinder, Some(bot(&at)), Some(top(&at)))
            };
            drop(&mut pieces, &at);
            let letter_winner = winner.as_ref().map(|_| at.clone());
            step = RVStep { case, winner, loser, lambda1: lam, letter_winner, deleted: Some(at), d_before: d };
        } else if it.lo < ib.lo {
            // top wins; the loser's branch becomes T_{α_t} ∘ T_{α_b}
            let t = Interval::new(it.lo.clone(), ib.lo.clone());
            set(&mut pieces, &at, t.clone(), m.image_interval(&at, &t));
            let tb = m.top_interval(&ab).unwrap();
            set(&mut pieces, &ab, tb, m.image_interval(&at, &ib));
            step = RVStep {
                case: Case::OneA,
                winner: Some(top(&at)),
                loser: Some(bot(&ab)),
                lambda1: lam,
                letter_winner: Some(at),
                deleted: None,
                d_before: d,
            };
        } else if it.lo > ib.lo {
            // bottom wins; the loser's branch becomes T_{α_t} ∘ T_{α_b}
            let b = Interval::new(ib.lo.clone(), it.lo.clone());
            set(&mut pieces, &ab, m.preimage_interval(&ab, &b), b);
            let bt = m.bottom_interval(&at).unwrap();
            set(&mut pieces, &at, m.preimage_interval(&ab, &it), bt);
            step = RVStep {
                case: Case::OneA,
                winner: Some(bot(&ab)),
                loser: Some(top(&at)),
                lambda1: lam,
                letter_winner: Some(ab),
                deleted: None,
                d_before: d,
            };
        } else {
            // I^t_{α_t} = I^b_{α_b}: α_b absorbs α_t
            let tb = m.top_interval(&ab).unwrap();
            let bt = m.bottom_interval(&at).unwrap();
            set(&mut pieces, &ab, tb, bt);
            drop(&mut pieces, &at);
            step = RVStep {
                case: Case::OneB,
                winner: None,
                loser: None,
                lambda1: lam,
                letter_winner: None,
                deleted: Some(at),
                d_before: d,
            };
        }
    } else {
        let lo = Scalar::max_of(&it.lo, &ib.lo);
        let hi = Scalar::min_of(&it.hi, &ib.hi);
        if lo < hi {
            if it.hi > ib.hi {
                let t = Interval::new(it.lo.clone(), ib.hi.clone());
                let b = m.image_interval(&at, &t);
                set(&mut pieces, &at, t, b);
                step = RVStep {
                    case: Case::TwoA,
                    winner: Some(top(&at)),
                    loser: Some(Player::Gap(Side::Bottom)),
                    lambda1: hi,
                    letter_winner: Some(at),
                    deleted: None,
                    d_before: d,
                };
            } else {
                let b = Interval::new(ib.lo.clone(), it.hi.clone());
                let t = m.preimage_interval(&ab, &b);
                set(&mut pieces, &ab, t, b);
                step = RVStep {
                    case: Case::TwoA,
                    winner: Some(bot(&ab)),
                    loser: Some(Player::Gap(Side::Top)),
                    lambda1: hi,
                    letter_winner: Some(ab),
                    deleted: None,
                    d_before: d,
                };
            }
        } else {
            let case = if lo == hi { Case::TwoBoundary } else { Case::TwoB };
            let (winner, loser, gone) = if it.hi < ib.hi {
                (Player::Gap(Side::Top), bot(&ab), ab)
            } else {
                (Player::Gap(Side::Bottom), top(&at), at)
            };
            drop(&mut pieces, &gone);
            step = RVStep {
                case,
                winner: Some(winner),
                loser: Some(loser),
                lambda1: lo,
                letter_winner: None,
                deleted: Some(gone),
                d_before: d,
            };
        }
    }
    let next = GGiet::from_pieces(&step.lambda1, pieces)?;
    Ok((step, next))
}

/// One elementary step.
///
/// With `d = 1`, a step that would delete the last letter in case 1b or
/// 1a-cyl stops the induction instead; the map is kept. A map with no
/// intervals is stopped as well.
pub fn rv_step(m: &GGiet) -> Result<StepOutcome, InductionError> {
    let v = m.validate();
    if !v.is_empty() {
        return Err(InductionError::InvalidMap(v));
    }
    step_checked_input(m)
}

fn step_checked_input(m: &GGiet) -> Result<StepOutcome, InductionError> {
    if m.d() == 0 {
        return Ok(StepOutcome::Stopped(StopReason::Empty));
    }
    let (step, next) = raw_step(m)?;
    if m.d() == 1 && matches!(step.case, Case::OneB | Case::OneACylinder) {
        return Ok(StepOutcome::Stopped(StopReason::LastLetter(step)));
    }
    Ok(StepOutcome::Advanced(step, next))
}

/// Formula-built and first-return-built maps that disagree.
#[derive(Debug, Clone)]
pub struct OracleMismatch {
    pub step: RVStep,
    pub formula: GGiet,
    pub oracle: GGiet,
}

/// Recomputes `T^(1)` as the first return map to `[0, λ^(1))` with horizon 4
/// and compares it with the formula-built map. Steps that stop the
/// induction are compared as well.
pub fn rv_step_oracle_check(m: &GGiet) -> Result<Result<RVStep, Box<OracleMismatch>>, InductionError> {
    let v = m.validate();
    if !v.is_empty() {
        return Err(InductionError::InvalidMap(v));
    }
    let (step, formula) = raw_step(m)?;
    let fr = m.first_return(&Interval::new(Scalar::zero(), step.lambda1.clone()), 4)?;
    if fr.map == formula {
        Ok(Ok(step))
    } else {
        Ok(Err(Box::new(OracleMismatch { step, formula, oracle: fr.map })))
    }
}

/// Lengths and slopes up to a common factor, with the extended combinatorics.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectiveState {
    pub comb: CombData,
    pub top_lengths: Vec<Scalar>,
    pub bottom_lengths: Vec<Scalar>,
    pub slopes: Vec<(Label, Scalar)>,
}

impl ProjectiveState {
    /// Lengths are divided by the length of the first top item.
    pub fn of(m: &GGiet) -> Option<ProjectiveState> {
        let unit = m.top().items().first()?.length.clone();
        let norm = |l: &crate::ggiet::Layout| l.items().iter().map(|i| &i.length / &unit).collect::<Vec<_>>();
        Some(ProjectiveState {
            comb: m.comb(),
            top_lengths: norm(m.top()),
            bottom_lengths: norm(m.bottom()),
            slopes: m.slopes().iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicityCertificate {
    pub preperiod: usize,
    pub period: usize,
    pub witness: ProjectiveState,
    /// `|T^(preperiod+period)| / |T^(preperiod)|`.
    pub scale: Scalar,
}

/// A map and the heights of its letters after some number of steps.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub map: GGiet,
    pub heights: BTreeMap<Label, usize>,
}

/// A letter that wins every later step, with the fixed point its intervals
/// shrink to. Either `α_t = α_b` with `r^t ≠ r^b`, or `α` is the last item of
/// one line (no gap after it). In both cases the branch has a fixed point in
/// `[max(lo), min(hi))` of its top and bottom intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cylinder {
    pub label: Label,
    pub fixed_point: Scalar,
}

pub fn cylinder_fixed_point(m: &GGiet) -> Option<Cylinder> {
    let ((at, it), (ab, ib)) = endpoints(m)?;
    let lam = m.ambient();
    let candidates: Vec<Label> = if at == ab {
        if it.hi == ib.hi {
            return None;
        }
        vec![at]
    } else {
        // at most one of these can qualify
        let mut v = Vec::new();
        if &it.hi == lam {
            v.push(at);
        }
        if &ib.hi == lam {
            v.push(ab);
        }
        v
    };
    candidates.into_iter().find_map(|l| {
        let (it, ib) = (m.top_interval(&l)?, m.bottom_interval(&l)?);
        let (slope, delta) = m.branch(&l)?;
        if slope == Scalar::one() {
            return None;
        }
        let p = &delta / (Scalar::one() - &slope);
        let lo = Scalar::max_of(&it.lo, &ib.lo);
        let hi = Scalar::min_of(&it.hi, &ib.hi);
        (lo <= p && p < hi).then_some(Cylinder { label: l, fixed_point: p })
    })
}

#[derive(Debug, Clone)]
pub struct RVState {
    pub current: GGiet,
    pub n: usize,
    pub heights: BTreeMap<Label, usize>,
    pub steps: Vec<RVStep>,
    /// γ: winning letter at every step where an interval wins.
    pub winner_stream: Vec<Label>,
    /// γ̃: winning letter at interval-vs-interval steps.
    pub reduced_stream: Vec<Label>,
    /// `r^{t,n}` for `n = 0..=self.n` (0 once no interval is left).
    pub r_top_history: Vec<Scalar>,
    /// `history[i]` is the state after `i` steps.
    pub history: Vec<Snapshot>,
    pub stop: Option<StopReason>,
    pub certificate: Option<PeriodicityCertificate>,
    /// First step at which [`cylinder_fixed_point`] applies.
    pub cylinder_step: Option<usize>,
    /// Iteration was cut short by the denominator cap.
    pub capped: bool,
}

impl RVState {
    pub fn d(&self) -> usize {
        self.current.d()
    }

    /// Number of steps since the last step that deleted a letter.
    pub fn steps_since_structural(&self) -> usize {
        let last = self.steps.iter().rposition(|s| s.case.deletes()).map(|i| i + 1).unwrap_or(0);
        self.n - last
    }

    /// Letters winning at steps `from..to`.
    fn winners_in(&self, from: usize, to: usize) -> BTreeSet<Label> {
        self.steps[from..to].iter().filter_map(|s| s.letter_winner.clone()).collect()
    }
}

fn r_top(m: &GGiet) -> Scalar {
    m.top().rightmost_interval().map(|(_, i)| i.hi).unwrap_or_else(Scalar::zero)
}

/// Runs up to `max_steps` steps with all heights 1.
pub fn iterate(m: &GGiet, max_steps: usize) -> Result<RVState, InductionError> {
    let h = m.alphabet().into_iter().map(|l| (l, 1)).collect();
    iterate_with_heights(m, h, max_steps)
}

/// Runs up to `max_steps` steps starting from the given heights (one per
/// letter). Used when the map is itself induced from another.
pub fn iterate_with_heights(
    m: &GGiet,
    heights: BTreeMap<Label, usize>,
    max_steps: usize,
) -> Result<RVState, InductionError> {
    iterate_until(m, heights, max_steps, |_| false)
}

/// Like [`iterate_with_heights`], but stops as soon as `done` holds (checked
/// on the initial state and after every step).
pub fn iterate_until<F: FnMut(&RVState) -> bool>(
    m: &GGiet,
    heights: BTreeMap<Label, usize>,
    max_steps: usize,
    mut done: F,
) -> Result<RVState, InductionError> {
    let v = m.validate();
    if !v.is_empty() {
        return Err(InductionError::InvalidMap(v));
    }
    if heights.keys().cloned().collect::<BTreeSet<_>>() != m.alphabet() {
        return Err(InductionError::Giet(GietError::Invalid("heights must cover the alphabet exactly".into())));
    }
    let mut st = RVState {
        current: m.clone(),
        n: 0,
        heights: heights.clone(),
        steps: Vec::new(),
        winner_stream: Vec::new(),
        reduced_stream: Vec::new(),
        r_top_history: vec![r_top(m)],
        history: vec![Snapshot { map: m.clone(), heights }],
        stop: None,
        certificate: None,
        cylinder_step: cylinder_fixed_point(m).map(|_| 0),
        capped: false,
    };
    let mut seen: HashMap<ProjectiveState, usize> = HashMap::new();
    if let Some(p) = ProjectiveState::of(m) {
        seen.insert(p, 0);
    }
    while st.n < max_steps && !done(&st) {
        if scalar::denom_cap_exceeded() {
            st.capped = true;
            break;
        }
        let (step, next) = match step_checked_input(&st.current)? {
            StepOutcome::Stopped(r) => {
                st.stop = Some(r);
                break;
            }
            StepOutcome::Advanced(s, n) => (s, n),
        };
        match step.case {
            Case::OneA => {
                let w = step.letter_winner.clone().unwrap();
                let Some(Player::Interval(l, _)) = &step.loser else { unreachable!() };
                let k = st.heights[&w];
                *st.heights.get_mut(l).unwrap() += k;
            }
            Case::OneB => {
                let gone = step.deleted.clone().unwrap();
                let k = st.heights.remove(&gone).unwrap();
                if let Some((ab, _)) = st.current.bottom().rightmost_interval() {
                    if ab != gone {
                        *st.heights.get_mut(&ab).unwrap() += k;
                    }
                }
            }
            Case::OneACylinder | Case::TwoB | Case::TwoBoundary => {
                st.heights.remove(step.deleted.as_ref().unwrap());
            }
            Case::TwoA => {}
        }
        if let Some(w) = &step.letter_winner {
            st.winner_stream.push(w.clone());
            if step.interval_vs_interval() {
                st.reduced_stream.push(w.clone());
            }
        }
        st.current = next;
        st.n += 1;
        st.steps.push(step);
        st.r_top_history.push(r_top(&st.current));
        st.history.push(Snapshot { map: st.current.clone(), heights: st.heights.clone() });
        if st.cylinder_step.is_none() && cylinder_fixed_point(&st.current).is_some() {
            st.cylinder_step = Some(st.n);
        }
        if st.certificate.is_none() {
            if let Some(p) = ProjectiveState::of(&st.current) {
                if let Some(&pre) = seen.get(&p) {
                    let scale = st.current.ambient() / st.history[pre].map.ambient();
                    st.certificate =
                        Some(PeriodicityCertificate { preperiod: pre, period: st.n - pre, witness: p, scale });
                } else {
                    seen.insert(p, st.n);
                }
            }
        }
    }
    Ok(st)
}

/// The first exact recurrence of the projective state along the run.
pub fn detect_periodicity(state: &RVState) -> Option<PeriodicityCertificate> {
    let mut seen: HashMap<ProjectiveState, usize> = HashMap::new();
    for (i, s) in state.history.iter().enumerate() {
        let Some(p) = ProjectiveState::of(&s.map) else { continue };
        if let Some(&pre) = seen.get(&p) {
            let scale = s.map.ambient() / state.history[pre].map.ambient();
            return Some(PeriodicityCertificate { preperiod: pre, period: i - pre, witness: p, scale });
        }
        seen.insert(p, i);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable { a_inf: BTreeSet<Label>, certified: bool },
    NotYetStable,
    Stopped1b { label: Label },
    Trivialized,
}

pub fn default_window(d: usize) -> usize {
    8 * d.max(1)
}

/// Letters that win within one period of the certificate.
fn certified_a_inf(state: &RVState, c: &PeriodicityCertificate) -> BTreeSet<Label> {
    state.winners_in(c.preperiod, c.preperiod + c.period)
}

pub fn classify_stability(state: &RVState, window: usize) -> Stability {
    match &state.stop {
        Some(StopReason::LastLetter(s)) => {
            return Stability::Stopped1b { label: s.deleted.clone().unwrap() };
        }
        Some(StopReason::Empty) => return Stability::Trivialized,
        None => {}
    }
    if state.d() == 0 {
        return Stability::Trivialized;
    }
    if let Some(c) = cylinder_fixed_point(&state.current) {
        return Stability::Stable { a_inf: [c.label].into_iter().collect(), certified: true };
    }
    if let Some(c) = &state.certificate {
        return Stability::Stable { a_inf: certified_a_inf(state, c), certified: true };
    }
    if state.steps_since_structural() >= window && window > 0 {
        let a_inf = state.winners_in(state.n - window, state.n);
        if a_inf.is_empty() {
            return Stability::Trivialized;
        }
        return Stability::Stable { a_inf, certified: false };
    }
    Stability::NotYetStable
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RenormLimit {
    /// `at_endpoint`: the limit is the right endpoint of a cylinder fixing it,
    /// a periodic orbit at an endpoint.
    Exact {
        value: Scalar,
        at_endpoint: bool,
    },
    Bracket {
        lo: Scalar,
        hi: Scalar,
    },
    /// The induction ran out of intervals; the last `λ^(n)`.
    TransitionMarker {
        lambda: Scalar,
    },
}

pub fn renorm_limit(state: &RVState, window: usize) -> Result<RenormLimit, InductionError> {
    match &state.stop {
        Some(StopReason::LastLetter(s)) => {
            let r = state.current.top_interval(s.deleted.as_ref().unwrap()).unwrap().hi;
            return Ok(RenormLimit::Exact { value: r, at_endpoint: true });
        }
        Some(StopReason::Empty) => {
            return Ok(RenormLimit::TransitionMarker { lambda: state.current.ambient().clone() });
        }
        None => {}
    }
    if state.d() == 0 {
        return Ok(RenormLimit::TransitionMarker { lambda: state.current.ambient().clone() });
    }
    if let Some(c) = cylinder_fixed_point(&state.current) {
        return Ok(RenormLimit::Exact { value: c.fixed_point, at_endpoint: false });
    }
    if state.certificate.is_some() {
        return Ok(RenormLimit::Exact { value: Scalar::zero(), at_endpoint: false });
    }
    match classify_stability(state, window) {
        Stability::Stable { .. } => {
            Ok(RenormLimit::Bracket { lo: Scalar::zero(), hi: state.r_top_history.last().unwrap().clone() })
        }
        _ => Err(InductionError::NotStable),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfComplete {
    Yes { certified: bool },
    No { missing: BTreeSet<Label>, certified: bool },
    Undecided,
}

pub fn inf_complete(state: &RVState, window: usize) -> InfComplete {
    match classify_stability(state, window) {
        Stability::Stable { a_inf, certified } => {
            let missing: BTreeSet<Label> = state.current.alphabet().difference(&a_inf).cloned().collect();
            if missing.is_empty() {
                InfComplete::Yes { certified }
            } else {
                InfComplete::No { missing, certified }
            }
        }
        _ => InfComplete::Undecided,
    }
}
