//! Interval exchange maps with gaps and affine branches.
//!
//! A [`GGiet`] maps the top intervals `I_α^t` onto the bottom intervals `I_α^b`
//! by `x ↦ λ_α (x − l_α^t) + l_α^b`. Both lines live on the same ambient
//! interval `[0, L)`; whatever is not covered by an interval is a gap.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intervals::{Interval, IntervalSet};
use crate::scalar::{Scalar, ScalarError};

pub type Label = String;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GietError {
    #[error("empty label")]
    EmptyLabel,
    #[error("label {0} appears twice in one line")]
    DuplicateLabel(Label),
    #[error("non-positive length for {0}")]
    NonPositiveLength(String),
    #[error("pieces overlap near {0}")]
    Overlap(Box<Scalar>),
    #[error("pieces exceed the ambient length")]
    ExceedsAmbient,
    #[error("point {0} outside [0, {1})")]
    OutOfRange(Box<Scalar>, Box<Scalar>),
    #[error("set is not contained in the domain")]
    NotContained,
    #[error("first return time exceeds horizon {horizon} on {piece}")]
    HorizonExceeded { horizon: usize, piece: Box<Interval> },
    #[error("unknown label {0}")]
    UnknownLabel(Label),
    #[error("invalid map: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ItemKind {
    Interval(Label),
    Gap,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Item {
    pub kind: ItemKind,
    pub length: Scalar,
}

impl Item {
    pub fn interval(label: impl Into<Label>, length: Scalar) -> Self {
        Item { kind: ItemKind::Interval(label.into()), length }
    }

    pub fn gap(length: Scalar) -> Self {
        Item { kind: ItemKind::Gap, length }
    }

    pub fn label(&self) -> Option<&Label> {
        match &self.kind {
            ItemKind::Interval(l) => Some(l),
            ItemKind::Gap => None,
        }
    }
}

impl fmt::Debug for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ItemKind::Interval(l) => write!(f, "{}:{}", l, self.length),
            ItemKind::Gap => write!(f, "_:{}", self.length),
        }
    }
}

/// Where a point falls on one line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    Interval(Label),
    /// Index of the gap, counting gaps from the left starting at 0.
    Gap(usize),
}

/// One line of a two-line diagram: intervals and gaps from left to right.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Layout {
    items: Vec<Item>,
    lefts: Vec<Scalar>,
    total: Scalar,
}

impl Layout {
    /// Builds the canonical layout: empty gaps dropped, adjacent gaps merged.
    pub fn new(items: Vec<Item>) -> Result<Layout, GietError> {
        let mut field: Option<u64> = None;
        for it in &items {
            if let Some(e) = it.length.field() {
                match field {
                    Some(f) if f != e => return Err(ScalarError::FieldMismatch(f, e).into()),
                    _ => field = Some(e),
                }
            }
        }
        let mut seen = BTreeSet::new();
        let mut canon: Vec<Item> = Vec::with_capacity(items.len());
        for it in items {
            match &it.kind {
                ItemKind::Interval(l) => {
                    if l.is_empty() {
                        return Err(GietError::EmptyLabel);
                    }
                    if !seen.insert(l.clone()) {
                        return Err(GietError::DuplicateLabel(l.clone()));
                    }
                    if !it.length.is_positive() {
                        return Err(GietError::NonPositiveLength(l.clone()));
                    }
                    canon.push(it);
                }
                ItemKind::Gap => {
                    if it.length.is_negative() {
                        return Err(GietError::NonPositiveLength("gap".into()));
                    }
                    if it.length.is_zero() {
                        continue;
                    }
                    match canon.last_mut() {
                        Some(last) if last.kind == ItemKind::Gap => {
                            last.length = &last.length + &it.length;
                        }
                        _ => canon.push(it),
                    }
                }
            }
        }
        let mut lefts = Vec::with_capacity(canon.len());
        let mut acc = Scalar::zero();
        for it in &canon {
            lefts.push(acc.clone());
            acc = &acc + &it.length;
        }
        Ok(Layout { items: canon, lefts, total: acc })
    }

    pub fn empty_with_total(total: Scalar) -> Result<Layout, GietError> {
        Layout::new(vec![Item::gap(total)])
    }

    /// Lays out labelled pieces on `[0, total)`, filling the rest with gaps.
    pub fn from_pieces(total: &Scalar, mut pieces: Vec<(Label, Interval)>) -> Result<Layout, GietError> {
        pieces.sort_by(|a, b| a.1.lo.cmp(&b.1.lo));
        let mut items = Vec::new();
        let mut cur = Scalar::zero();
        for (label, iv) in pieces {
            if iv.lo < cur {
                return Err(GietError::Overlap(Box::new(iv.lo)));
            }
            if iv.lo > cur {
                items.push(Item::gap(&iv.lo - &cur));
            }
            items.push(Item::interval(label, iv.length()));
            cur = iv.hi;
        }
        if &cur > total {
            return Err(GietError::ExceedsAmbient);
        }
        items.push(Item::gap(total - &cur));
        Layout::new(items)
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn total(&self) -> &Scalar {
        &self.total
    }

    /// Items with their positions.
    pub fn positioned(&self) -> impl Iterator<Item = (&Item, Interval)> + '_ {
        self.items.iter().zip(&self.lefts).map(|(it, l)| (it, Interval::new(l.clone(), l + &it.length)))
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> + '_ {
        self.items.iter().filter_map(|i| i.label())
    }

    pub fn interval_count(&self) -> usize {
        self.labels().count()
    }

    pub fn gap_count(&self) -> usize {
        self.items.iter().filter(|i| i.kind == ItemKind::Gap).count()
    }

    pub fn find(&self, label: &str) -> Option<Interval> {
        self.positioned().find(|(it, _)| it.label().map(|l| l.as_str()) == Some(label)).map(|(_, iv)| iv)
    }

    /// Intervals (not gaps) in left-to-right order.
    pub fn intervals(&self) -> Vec<(Label, Interval)> {
        self.positioned().filter_map(|(it, iv)| it.label().map(|l| (l.clone(), iv))).collect()
    }

    pub fn gaps(&self) -> Vec<Interval> {
        self.positioned().filter(|(it, _)| it.kind == ItemKind::Gap).map(|(_, iv)| iv).collect()
    }

    /// Union of the interval items.
    pub fn support(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.intervals().into_iter().map(|(_, iv)| iv).collect())
    }

    pub fn rightmost_interval(&self) -> Option<(Label, Interval)> {
        self.intervals().pop()
    }

    /// Locates `x`, which must lie in `[0, total)`.
    pub fn locate(&self, x: &Scalar) -> Option<Slot> {
        if x.is_negative() || x >= &self.total {
            return None;
        }
        // last item whose left endpoint is <= x
        let idx = self.lefts.partition_point(|l| l <= x) - 1;
        Some(match &self.items[idx].kind {
            ItemKind::Interval(l) => Slot::Interval(l.clone()),
            ItemKind::Gap => Slot::Gap(self.items[..idx].iter().filter(|i| i.kind == ItemKind::Gap).count()),
        })
    }

    /// Splits `j` along item boundaries.
    pub fn split(&self, j: &Interval) -> Vec<(Slot, Interval)> {
        let mut out = Vec::new();
        let mut gap_idx = 0;
        for (it, iv) in self.positioned() {
            let slot = match &it.kind {
                ItemKind::Interval(l) => Slot::Interval(l.clone()),
                ItemKind::Gap => {
                    gap_idx += 1;
                    Slot::Gap(gap_idx - 1)
                }
            };
            if let Some(p) = iv.intersect(j) {
                out.push((slot, p));
            }
        }
        out
    }
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.items).finish()
    }
}

/// A violated invariant reported by [`GGiet::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingFromTop(Label),
    MissingFromBottom(Label),
    MissingSlope(Label),
    SlopeWithoutInterval(Label),
    NonPositiveSlope(Label),
    BranchLengthMismatch(Label),
    AmbientLengthMismatch,
    FieldMismatch(u64, u64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingFromTop(l) => write!(f, "label {} missing from top line", l),
            Violation::MissingFromBottom(l) => write!(f, "label {} missing from bottom line", l),
            Violation::MissingSlope(l) => write!(f, "missing slope for {}", l),
            Violation::SlopeWithoutInterval(l) => write!(f, "slope given for unknown label {}", l),
            Violation::NonPositiveSlope(l) => write!(f, "non-positive slope for {}", l),
            Violation::BranchLengthMismatch(l) => write!(f, "branch length mismatch for {}", l),
            Violation::AmbientLengthMismatch => write!(f, "ambient length mismatch"),
            Violation::FieldMismatch(a, b) => write!(f, "field mismatch: sqrt({}) vs sqrt({})", a, b),
        }
    }
}

/// Result of applying a map to a point of `[0, L)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Image {
    Point(Scalar),
    /// The point lies in the given gap (index among the gaps of that line).
    NotInDomain(usize),
}

/// Combinatorial datum: positions of the labels on each line, with and
/// without gaps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CombData {
    pub pi_top: BTreeMap<Label, usize>,
    pub pi_bottom: BTreeMap<Label, usize>,
    /// `None` marks a gap.
    pub extended_top: Vec<Option<Label>>,
    pub extended_bottom: Vec<Option<Label>>,
}

impl CombData {
    pub fn d(&self) -> usize {
        self.pi_top.len()
    }

    /// Labels in top order.
    pub fn top_order(&self) -> Vec<Label> {
        self.extended_top.iter().flatten().cloned().collect()
    }

    pub fn bottom_order(&self) -> Vec<Label> {
        self.extended_bottom.iter().flatten().cloned().collect()
    }

    pub fn has_gaps(&self) -> bool {
        self.extended_top.iter().chain(&self.extended_bottom).any(|x| x.is_none())
    }

    /// A gapless datum from two orderings of the same labels.
    pub fn from_orders(top: &[&str], bottom: &[&str]) -> CombData {
        let ext_t: Vec<Option<Label>> = top.iter().map(|s| Some(s.to_string())).collect();
        let ext_b: Vec<Option<Label>> = bottom.iter().map(|s| Some(s.to_string())).collect();
        CombData::from_extended(ext_t, ext_b)
    }

    pub fn from_extended(extended_top: Vec<Option<Label>>, extended_bottom: Vec<Option<Label>>) -> CombData {
        let rank = |v: &[Option<Label>]| {
            v.iter().flatten().enumerate().map(|(i, l)| (l.clone(), i + 1)).collect::<BTreeMap<_, _>>()
        };
        CombData { pi_top: rank(&extended_top), pi_bottom: rank(&extended_bottom), extended_top, extended_bottom }
    }
}

/// An interval exchange map with gaps and affine branches.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GGiet {
    top: Layout,
    bottom: Layout,
    slopes: BTreeMap<Label, Scalar>,
}

impl fmt::Debug for GGiet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GGiet")
            .field("top", &self.top)
            .field("bottom", &self.bottom)
            .field("slopes", &self.slopes)
            .finish()
    }
}

impl GGiet {
    /// Assembles a map without checking it; see [`GGiet::validate`].
    pub fn new(top: Layout, bottom: Layout, slopes: BTreeMap<Label, Scalar>) -> GGiet {
        GGiet { top, bottom, slopes }
    }

    /// Assembles and validates.
    pub fn checked(top: Layout, bottom: Layout, slopes: BTreeMap<Label, Scalar>) -> Result<GGiet, Vec<Violation>> {
        let m = GGiet::new(top, bottom, slopes);
        let v = m.validate();
        if v.is_empty() {
            Ok(m)
        } else {
            Err(v)
        }
    }

    /// Builds a map from layouts alone, deriving each slope as `|I^b| / |I^t|`.
    pub fn from_layouts(top: Layout, bottom: Layout) -> Result<GGiet, GietError> {
        let mut slopes = BTreeMap::new();
        for (l, t) in top.intervals() {
            let b = bottom.find(&l).ok_or_else(|| GietError::Invalid(format!("{} missing from bottom", l)))?;
            slopes.insert(l, b.length() / t.length());
        }
        let m = GGiet::new(top, bottom, slopes);
        let v = m.validate();
        if v.is_empty() {
            Ok(m)
        } else {
            Err(GietError::Invalid(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")))
        }
    }

    /// Builds a map on `[0, ambient)` from `(label, top piece, bottom piece)`.
    pub fn from_pieces(ambient: &Scalar, pieces: Vec<(Label, Interval, Interval)>) -> Result<GGiet, GietError> {
        let top = Layout::from_pieces(ambient, pieces.iter().map(|(l, t, _)| (l.clone(), t.clone())).collect())?;
        let bottom = Layout::from_pieces(ambient, pieces.into_iter().map(|(l, _, b)| (l, b)).collect())?;
        GGiet::from_layouts(top, bottom)
    }

    /// The empty map on `[0, ambient)`.
    pub fn empty(ambient: &Scalar) -> GGiet {
        let l = Layout::empty_with_total(ambient.clone()).expect("non-negative ambient");
        GGiet::new(l.clone(), l, BTreeMap::new())
    }

    /// Convenience constructor for tests and examples: labels with lengths
    /// (`None` for a gap) on each line and a slope per label.
    pub fn build(
        top: &[(Option<&str>, Scalar)],
        bottom: &[(Option<&str>, Scalar)],
        slopes: &[(&str, Scalar)],
    ) -> Result<GGiet, GietError> {
        let mk = |v: &[(Option<&str>, Scalar)]| {
            Layout::new(
                v.iter()
                    .map(|(l, s)| match l {
                        Some(l) => Item::interval(*l, s.clone()),
                        None => Item::gap(s.clone()),
                    })
                    .collect(),
            )
        };
        let m = GGiet::new(mk(top)?, mk(bottom)?, slopes.iter().map(|(l, s)| (l.to_string(), s.clone())).collect());
        let v = m.validate();
        if v.is_empty() {
            Ok(m)
        } else {
            Err(GietError::Invalid(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")))
        }
    }

    pub fn top(&self) -> &Layout {
        &self.top
    }

    pub fn bottom(&self) -> &Layout {
        &self.bottom
    }

    pub fn slopes(&self) -> &BTreeMap<Label, Scalar> {
        &self.slopes
    }

    pub fn alphabet(&self) -> BTreeSet<Label> {
        self.top.labels().cloned().collect()
    }

    pub fn d(&self) -> usize {
        self.top.interval_count()
    }

    pub fn ambient(&self) -> &Scalar {
        self.top.total()
    }

    pub fn slope(&self, label: &str) -> Option<&Scalar> {
        self.slopes.get(label)
    }

    pub fn top_interval(&self, label: &str) -> Option<Interval> {
        self.top.find(label)
    }

    pub fn bottom_interval(&self, label: &str) -> Option<Interval> {
        self.bottom.find(label)
    }

    /// `(λ, δ)` with `T_α(x) = λ x + δ`.
    pub fn branch(&self, label: &str) -> Option<(Scalar, Scalar)> {
        let lam = self.slopes.get(label)?;
        let t = self.top.find(label)?;
        let b = self.bottom.find(label)?;
        Some((lam.clone(), &b.lo - lam * &t.lo))
    }

    /// Applies branch `label` to `x` without checking that `x` lies in it.
    pub fn apply_branch(&self, label: &str, x: &Scalar) -> Scalar {
        let t = self.top.find(label).expect("label in top");
        let b = self.bottom.find(label).expect("label in bottom");
        &self.slopes[label] * (x - &t.lo) + &b.lo
    }

    /// Inverse branch of `label` applied to `y`.
    pub fn apply_branch_inverse(&self, label: &str, y: &Scalar) -> Scalar {
        let t = self.top.find(label).expect("label in top");
        let b = self.bottom.find(label).expect("label in bottom");
        (y - &b.lo) / &self.slopes[label] + &t.lo
    }

    /// Image of a sub-interval of `I_label^t` under the branch.
    pub fn image_interval(&self, label: &str, j: &Interval) -> Interval {
        Interval::new(self.apply_branch(label, &j.lo), self.apply_branch(label, &j.hi))
    }

    pub fn preimage_interval(&self, label: &str, j: &Interval) -> Interval {
        Interval::new(self.apply_branch_inverse(label, &j.lo), self.apply_branch_inverse(label, &j.hi))
    }

    /// Field shared by all data of the map.
    pub fn field(&self) -> Result<Option<u64>, Violation> {
        let mut field: Option<u64> = None;
        let all = self.top.items().iter().chain(self.bottom.items()).map(|i| &i.length).chain(self.slopes.values());
        for s in all {
            if let Some(e) = s.field() {
                match field {
                    Some(f) if f != e => return Err(Violation::FieldMismatch(f, e)),
                    _ => field = Some(e),
                }
            }
        }
        Ok(field)
    }

    /// Lists every violated invariant; empty iff the map is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if let Err(v) = self.field() {
            // nothing else can be compared safely
            return vec![v];
        }
        let top: BTreeSet<&Label> = self.top.labels().collect();
        let bottom: BTreeSet<&Label> = self.bottom.labels().collect();
        for l in top.difference(&bottom) {
            out.push(Violation::MissingFromBottom((*l).clone()));
        }
        for l in bottom.difference(&top) {
            out.push(Violation::MissingFromTop((*l).clone()));
        }
        for l in top.union(&bottom) {
            if !self.slopes.contains_key(*l) {
                out.push(Violation::MissingSlope((*l).clone()));
            }
        }
        for l in self.slopes.keys() {
            if !top.contains(l) && !bottom.contains(l) {
                out.push(Violation::SlopeWithoutInterval(l.clone()));
            }
        }
        for l in top.intersection(&bottom) {
            let Some(lam) = self.slopes.get(*l) else { continue };
            if !lam.is_positive() {
                out.push(Violation::NonPositiveSlope((*l).clone()));
                continue;
            }
            let t = self.top.find(l).unwrap();
            let b = self.bottom.find(l).unwrap();
            if lam * t.length() != b.length() {
                out.push(Violation::BranchLengthMismatch((*l).clone()));
            }
        }
        if self.top.total() != self.bottom.total() {
            out.push(Violation::AmbientLengthMismatch);
        }
        out
    }

    fn check_range(&self, x: &Scalar) -> Result<(), GietError> {
        if x.is_negative() || x >= self.ambient() {
            return Err(GietError::OutOfRange(Box::new(x.clone()), Box::new(self.ambient().clone())));
        }
        Ok(())
    }

    pub fn apply(&self, x: &Scalar) -> Result<Image, GietError> {
        self.check_range(x)?;
        Ok(match self.top.locate(x).unwrap() {
            Slot::Interval(l) => Image::Point(self.apply_branch(&l, x)),
            Slot::Gap(g) => Image::NotInDomain(g),
        })
    }

    /// `T^{-1}(y)`, or the bottom gap containing `y`.
    pub fn apply_inverse(&self, y: &Scalar) -> Result<Image, GietError> {
        self.check_range(y)?;
        Ok(match self.bottom.locate(y).unwrap() {
            Slot::Interval(l) => Image::Point(self.apply_branch_inverse(&l, y)),
            Slot::Gap(g) => Image::NotInDomain(g),
        })
    }

    /// Swaps the lines and inverts the slopes.
    pub fn invert(&self) -> GGiet {
        let slopes = self.slopes.iter().map(|(l, s)| (l.clone(), s.recip().expect("positive slope"))).collect();
        GGiet::new(self.bottom.clone(), self.top.clone(), slopes)
    }

    /// The domain `I^t` as a set.
    pub fn domain(&self) -> IntervalSet {
        self.top.support()
    }

    pub fn range(&self) -> IntervalSet {
        self.bottom.support()
    }

    pub fn comb(&self) -> CombData {
        let ext = |l: &Layout| l.items().iter().map(|i| i.label().cloned()).collect::<Vec<_>>();
        CombData::from_extended(ext(&self.top), ext(&self.bottom))
    }

    /// Rebuilds a map from its extended combinatorics, item lengths on both
    /// lines and slopes.
    pub fn from_comb(
        comb: &CombData,
        top_lengths: &[Scalar],
        bottom_lengths: &[Scalar],
        slopes: &BTreeMap<Label, Scalar>,
    ) -> Result<GGiet, GietError> {
        let mk = |ext: &[Option<Label>], lens: &[Scalar]| {
            if ext.len() != lens.len() {
                return Err(GietError::Invalid("length vector does not match combinatorics".into()));
            }
            Layout::new(
                ext.iter()
                    .zip(lens)
                    .map(|(l, s)| match l {
                        Some(l) => Item::interval(l.clone(), s.clone()),
                        None => Item::gap(s.clone()),
                    })
                    .collect(),
            )
        };
        let m = GGiet::new(
            mk(&comb.extended_top, top_lengths)?,
            mk(&comb.extended_bottom, bottom_lengths)?,
            slopes.clone(),
        );
        let v = m.validate();
        if v.is_empty() {
            Ok(m)
        } else {
            Err(GietError::Invalid(format!("{:?}", v)))
        }
    }

    /// `T|_J`: top intervals are the components of `J ∩ I_α^t`, bottoms their
    /// images. A letter split into several components gets labels `α#1`, `α#2`, ...
    pub fn restrict(&self, j: &IntervalSet) -> Result<GGiet, GietError> {
        if !self.domain().contains_set(j) {
            return Err(GietError::NotContained);
        }
        let mut pieces = Vec::new();
        for (l, t) in self.top.intervals() {
            let comps = j.intersect_interval(&t);
            let many = comps.parts().len() > 1;
            for (k, c) in comps.parts().iter().enumerate() {
                let label = if many { format!("{}#{}", l, k + 1) } else { l.clone() };
                pieces.push((label, c.clone(), self.image_interval(&l, c)));
            }
        }
        GGiet::from_pieces(self.ambient(), pieces)
    }

    /// Letters whose bottom interval sits inside their own top interval: such
    /// an interval is forward invariant.
    fn is_trap(&self, label: &str, j: &IntervalSet) -> bool {
        let t = self.top.find(label).unwrap();
        let b = self.bottom.find(label).unwrap();
        t.contains_interval(&b) && j.intersect_interval(&b).is_empty()
    }

    /// First return map to the right-open interval `j`; see [`GGiet::first_return_set`].
    pub fn first_return(&self, j: &Interval, horizon: usize) -> Result<FirstReturn, GietError> {
        self.first_return_set(&IntervalSet::from_interval(j.clone()), horizon)
    }

    /// First return map to a finite union `J` of right-open intervals, as a map on
    /// `[0, sup J)` (points of `[0, sup J)` outside `J` are gaps).
    ///
    /// Points that fall into a top gap before returning, or that enter a
    /// forward-invariant letter whose bottom interval misses `J`, never return
    /// and are left out. Any other piece still travelling after `horizon`
    /// steps is an error.
    pub fn first_return_set(&self, j: &IntervalSet, horizon: usize) -> Result<FirstReturn, GietError> {
        let Some(sup) = j.sup().cloned() else {
            return Ok(FirstReturn {
                map: GGiet::empty(&Scalar::zero()),
                times: BTreeMap::new(),
                itineraries: BTreeMap::new(),
            });
        };
        if &sup > self.ambient() || j.parts()[0].lo.is_negative() {
            return Err(GietError::NotContained);
        }
        struct Piece {
            orig: Interval,
            cur: Interval,
            path: Vec<Label>,
        }
        let mut returned: Vec<Piece> = Vec::new();
        let mut work: Vec<Piece> = Vec::new();
        // one step applied to `p.cur`, splitting at top items
        let advance = |p: Piece, work: &mut Vec<Piece>| {
            for (slot, part) in self.top.split(&p.cur) {
                let Slot::Interval(l) = slot else { continue };
                if self.is_trap(&l, j) {
                    continue;
                }
                let orig = sub_piece(&p.orig, &p.cur, &part);
                let mut path = p.path.clone();
                let cur = self.image_interval(&l, &part);
                path.push(l);
                work.push(Piece { orig, cur, path });
            }
        };
        for c in j.parts() {
            advance(Piece { orig: c.clone(), cur: c.clone(), path: vec![] }, &mut work);
        }
        while let Some(p) = work.pop() {
            let inside = j.intersect_interval(&p.cur);
            for part in inside.parts() {
                returned.push(Piece {
                    orig: sub_piece(&p.orig, &p.cur, part),
                    cur: part.clone(),
                    path: p.path.clone(),
                });
            }
            let outside = IntervalSet::from_interval(p.cur.clone()).difference(&inside);
            for part in outside.parts() {
                let orig = sub_piece(&p.orig, &p.cur, part);
                if p.path.len() >= horizon {
                    return Err(GietError::HorizonExceeded { horizon, piece: Box::new(orig) });
                }
                advance(Piece { orig, cur: part.clone(), path: p.path.clone() }, &mut work);
            }
        }
        returned.sort_by(|a, b| a.orig.lo.cmp(&b.orig.lo));
        let labels = return_labels(&returned.iter().map(|p| p.path.clone()).collect::<Vec<_>>());
        let mut times = BTreeMap::new();
        let mut itineraries = BTreeMap::new();
        let mut pieces = Vec::new();
        for (p, l) in returned.into_iter().zip(labels) {
            times.insert(l.clone(), p.path.len());
            itineraries.insert(l.clone(), p.path);
            pieces.push((l, p.orig, p.cur));
        }
        let map = GGiet::from_pieces(&sup, pieces)?;
        Ok(FirstReturn { map, times, itineraries })
    }
}

/// The part of `orig` that an affine piece sends onto `part ⊆ cur`.
fn sub_piece(orig: &Interval, cur: &Interval, part: &Interval) -> Interval {
    if part == cur {
        return orig.clone();
    }
    let scale = orig.length() / cur.length();
    Interval::new(&orig.lo + (&part.lo - &cur.lo) * &scale, &orig.lo + (&part.hi - &cur.lo) * &scale)
}

/// Labels for returning pieces: the first letter of the itinerary when those
/// are distinct, else the last letter when those are, else `first#k`.
fn return_labels(paths: &[Vec<Label>]) -> Vec<Label> {
    let distinct = |v: &Vec<Label>| v.iter().collect::<BTreeSet<_>>().len() == v.len();
    let firsts: Vec<Label> = paths.iter().map(|p| p[0].clone()).collect();
    if distinct(&firsts) {
        return firsts;
    }
    let lasts: Vec<Label> = paths.iter().map(|p| p.last().unwrap().clone()).collect();
    if distinct(&lasts) {
        return lasts;
    }
    let mut count: BTreeMap<&Label, usize> = BTreeMap::new();
    firsts
        .iter()
        .map(|f| {
            let k = count.entry(f).or_insert(0);
            *k += 1;
            format!("{}#{}", f, k)
        })
        .collect()
}

/// A first return map with the return time and itinerary of each piece.
#[derive(Debug, Clone)]
pub struct FirstReturn {
    pub map: GGiet,
    pub times: BTreeMap<Label, usize>,
    pub itineraries: BTreeMap<Label, Vec<Label>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Scalar {
        Scalar::ratio(p, q)
    }

    fn rot13() -> GGiet {
        GGiet::build(
            &[(Some("A"), r(2, 3)), (Some("B"), r(1, 3))],
            &[(Some("B"), r(1, 3)), (Some("A"), r(2, 3))],
            &[("A", r(1, 1)), ("B", r(1, 1))],
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

    #[test]
    fn validate_reports() {
        assert!(rot13().validate().is_empty());
        let bad = GGiet::new(
            rot13().top().clone(),
            rot13().bottom().clone(),
            [("A".into(), r(2, 1)), ("B".into(), r(1, 1))].into(),
        );
        assert_eq!(bad.validate(), vec![Violation::BranchLengthMismatch("A".into())]);
        assert_eq!(bad.validate()[0].to_string(), "branch length mismatch for A");
        let short = Layout::new(vec![Item::interval("B", r(1, 3)), Item::interval("A", r(2, 3)), Item::gap(r(-1, 8))]);
        assert!(short.is_err());
        let bottom = Layout::new(vec![Item::interval("B", r(5, 24)), Item::interval("A", r(2, 3))]).unwrap();
        let m = GGiet::new(rot13().top().clone(), bottom, [("A".into(), r(1, 1)), ("B".into(), r(5, 8))].into());
        assert_eq!(m.validate(), vec![Violation::AmbientLengthMismatch]);
        assert_eq!(m.validate()[0].to_string(), "ambient length mismatch");
    }

    #[test]
    fn gaps_are_canonical() {
        let l =
            Layout::new(vec![Item::gap(r(1, 4)), Item::gap(r(1, 4)), Item::gap(r(0, 1)), Item::interval("A", r(1, 2))])
                .unwrap();
        assert_eq!(l.items().len(), 2);
        assert_eq!(l.items()[0], Item::gap(r(1, 2)));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(rot13().apply(&r(0, 1)).unwrap(), Image::Point(r(1, 3)));
        assert_eq!(cyl().apply(&r(1, 2)).unwrap(), Image::Point(r(1, 2)));
        assert_eq!(cyl().apply(&r(1, 8)).unwrap(), Image::NotInDomain(0));
        assert_eq!(cyl().apply(&r(7, 8)).unwrap(), Image::NotInDomain(1));
        assert!(cyl().apply(&r(1, 1)).is_err());
        assert!(cyl().apply(&r(-1, 8)).is_err());
    }

    #[test]
    fn invert_examples() {
        let inv = rot13().invert();
        let rot23 = GGiet::build(
            &[(Some("B"), r(1, 3)), (Some("A"), r(2, 3))],
            &[(Some("A"), r(2, 3)), (Some("B"), r(1, 3))],
            &[("A", r(1, 1)), ("B", r(1, 1))],
        )
        .unwrap();
        assert_eq!(inv, rot23);
        assert_eq!(inv.apply(&r(0, 1)).unwrap(), Image::Point(r(2, 3)));
        assert_eq!(cyl().invert().slope("A"), Some(&r(2, 1)));
        assert_eq!(cyl().invert().invert(), cyl());
    }

    #[test]
    fn restrict_rotation() {
        let m = rot13().restrict(&IntervalSet::from_interval(Interval::new(r(0, 1), r(2, 3)))).unwrap();
        assert!(m.validate().is_empty());
        assert_eq!(m.d(), 1);
        assert_eq!(m.top().gaps(), vec![Interval::new(r(2, 3), r(1, 1))]);
        assert_eq!(m.bottom().gaps(), vec![Interval::new(r(0, 1), r(1, 3))]);
        assert_eq!(rot13().restrict(&rot13().domain()).unwrap(), rot13());
        assert!(cyl().restrict(&IntervalSet::from_interval(Interval::new(r(0, 1), r(1, 2)))).is_err());
    }

    #[test]
    fn restrict_splits_letters() {
        let j = IntervalSet::from_intervals(vec![Interval::new(r(0, 1), r(1, 6)), Interval::new(r(1, 3), r(1, 2))]);
        let m = rot13().restrict(&j).unwrap();
        assert_eq!(m.alphabet(), ["A#1".to_string(), "A#2".to_string()].into());
    }

    #[test]
    fn first_return_rotation() {
        let fr = rot13().first_return(&Interval::new(r(0, 1), r(1, 3)), 10).unwrap();
        assert_eq!(fr.map.d(), 1);
        let (l, t) = fr.map.top().intervals().pop().unwrap();
        assert_eq!(t, Interval::new(r(0, 1), r(1, 3)));
        assert_eq!(fr.map.bottom_interval(&l).unwrap(), t);
        assert_eq!(fr.times[&l], 3);
        assert!(matches!(
            rot13().first_return(&Interval::new(r(0, 1), r(1, 3)), 2),
            Err(GietError::HorizonExceeded { .. })
        ));
        // the full span of a gapless map returns the map itself
        assert_eq!(rot13().first_return(&Interval::new(r(0, 1), r(1, 1)), 1).unwrap().map, rot13());
    }

    #[test]
    fn comb_round_trip() {
        let m = cyl();
        let c = m.comb();
        assert_eq!(c.extended_top, vec![None, Some("A".to_string()), None]);
        let tl: Vec<Scalar> = m.top().items().iter().map(|i| i.length.clone()).collect();
        let bl: Vec<Scalar> = m.bottom().items().iter().map(|i| i.length.clone()).collect();
        assert_eq!(GGiet::from_comb(&c, &tl, &bl, m.slopes()).unwrap(), m);
    }
}
