#![allow(dead_code)]

pub mod oracles;

use giet::decompose::{decompose, DecompositionReport};
use giet::{GGiet, Interval, IntervalSet, Item, Layout, Scalar};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn r(p: i64, q: i64) -> Scalar {
    Scalar::ratio(p, q)
}

fn layout<R: Rng>(rng: &mut R, labels: &[String], lens: &[i64], gaps: bool, total: i64) -> Layout {
    let mut items = Vec::new();
    for (l, &x) in labels.iter().zip(lens) {
        if gaps && rng.gen_bool(0.4) {
            items.push(Item::gap(r(rng.gen_range(1..4), total)));
        }
        items.push(Item::interval(l.clone(), r(x, total)));
    }
    if gaps && rng.gen_bool(0.4) {
        items.push(Item::gap(r(rng.gen_range(1..4), total)));
    }
    Layout::new(items).unwrap()
}

fn rescale(l: &Layout, to: &Scalar) -> Layout {
    let f = to / l.total();
    Layout::new(l.items().iter().map(|i| Item { kind: i.kind.clone(), length: &i.length * &f }).collect()).unwrap()
}

pub fn labels(d: usize) -> Vec<String> {
    (0..d).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

/// A random rational map with `d` letters. Small integer data makes the
/// coincidences of cases 1 and 2boundary frequent.
pub fn random_map<R: Rng>(rng: &mut R, d: usize, gaps: bool, affine: bool) -> GGiet {
    let ls = labels(d);
    let top_lens: Vec<i64> = (0..d).map(|_| rng.gen_range(1..5)).collect();
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    let bot_labels: Vec<String> = perm.iter().map(|&i| ls[i].clone()).collect();
    let bot_lens: Vec<i64> = if affine {
        (0..d).map(|_| rng.gen_range(1..5)).collect()
    } else {
        perm.iter().map(|&i| top_lens[i]).collect()
    };
    let top = layout(rng, &ls, &top_lens, gaps, 1);
    let bottom = layout(rng, &bot_labels, &bot_lens, gaps, 1);
    let (top, bottom) = if affine {
        (rescale(&top, &Scalar::one()), rescale(&bottom, &Scalar::one()))
    } else {
        // same interval lengths; pad the shorter line with a trailing gap
        let (t, b) = (top.total().clone(), bottom.total().clone());
        let total = Scalar::max_of(&t, &b);
        let pad = |l: Layout| {
            let extra = &total - l.total();
            let mut items = l.items().to_vec();
            if extra.is_positive() {
                items.push(Item::gap(extra));
            }
            Layout::new(items).unwrap()
        };
        let one = Scalar::one();
        (rescale(&pad(top), &one), rescale(&pad(bottom), &one))
    };
    GGiet::from_layouts(top, bottom).unwrap()
}

/// A random affine map whose slopes are all 1/2, 1 or 2, with random gaps.
/// Both lines are padded with a trailing gap to a common total, then scaled to 1.
pub fn random_dyadic_map<R: Rng>(rng: &mut R, d: usize) -> GGiet {
    let ls = labels(d);
    let slopes = [r(1, 2), r(1, 1), r(2, 1)];
    let top_lens: Vec<i64> = (0..d).map(|_| 2 * rng.gen_range(1..5)).collect();
    let sl: Vec<Scalar> = (0..d).map(|_| slopes[rng.gen_range(0..3)].clone()).collect();
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    let line = |rng: &mut R, parts: Vec<(String, Scalar)>| {
        let mut items = Vec::new();
        for (l, x) in parts {
            if rng.gen_bool(0.3) {
                items.push(Item::gap(r(rng.gen_range(1..4), 1)));
            }
            items.push(Item::interval(l, x));
        }
        items
    };
    let top = line(rng, ls.iter().zip(&top_lens).map(|(l, &x)| (l.clone(), r(x, 1))).collect());
    let bottom = line(rng, perm.iter().map(|&i| (ls[i].clone(), &sl[i] * r(top_lens[i], 1))).collect());
    let total = |v: &[Item]| v.iter().map(|i| i.length.clone()).sum::<Scalar>();
    let len = Scalar::max_of(&total(&top), &total(&bottom)) + r(rng.gen_range(0..3), 1);
    let pad = |mut v: Vec<Item>| {
        let extra = &len - total(&v);
        if extra.is_positive() {
            v.push(Item::gap(extra));
        }
        rescale(&Layout::new(v).unwrap(), &Scalar::one())
    };
    GGiet::from_layouts(pad(top), pad(bottom)).unwrap()
}

/// A random gapless interval exchange with irreducible-looking data.
pub fn random_iet<R: Rng>(rng: &mut R, d: usize, max_len: i64) -> GGiet {
    let ls = labels(d);
    let lens: Vec<i64> = (0..d).map(|_| rng.gen_range(1..=max_len)).collect();
    let total: i64 = lens.iter().sum();
    let mut perm: Vec<usize> = (0..d).collect();
    while perm.iter().enumerate().all(|(i, &p)| i == p) && d > 1 {
        perm.shuffle(rng);
    }
    let top =
        Layout::new(ls.iter().zip(&lens).map(|(l, &x)| Item::interval(l.clone(), r(x, total))).collect()).unwrap();
    let bottom = Layout::new(perm.iter().map(|&i| Item::interval(ls[i].clone(), r(lens[i], total))).collect()).unwrap();
    GGiet::from_layouts(top, bottom).unwrap()
}

fn ones<'a>(ls: &[&'a str]) -> Vec<(&'a str, Scalar)> {
    ls.iter().map(|l| (*l, r(1, 1))).collect()
}

/// `x ↦ x + α` on `[0, 1)`: A = [0, 1 − α), B = [1 − α, 1).
pub fn rotation(alpha: Scalar) -> GGiet {
    let a = Scalar::one() - &alpha;
    GGiet::build(
        &[(Some("A"), a.clone()), (Some("B"), alpha.clone())],
        &[(Some("B"), alpha), (Some("A"), a)],
        &ones(&["A", "B"]),
    )
    .unwrap()
}

pub fn phi() -> Scalar {
    (Scalar::one() + Scalar::sqrt_of(5).unwrap()) / Scalar::from_int(2)
}

/// Rotation by `φ − 1`.
pub fn golden() -> GGiet {
    rotation(phi() - Scalar::one())
}

/// One letter of slope 1/2 between gaps; attracting fixed point at 1/2.
pub fn cyl() -> GGiet {
    GGiet::build(
        &[(None, r(1, 4)), (Some("A"), r(1, 2)), (None, r(1, 4))],
        &[(None, r(3, 8)), (Some("A"), r(1, 4)), (None, r(3, 8))],
        &[("A", r(1, 2))],
    )
    .unwrap()
}

/// Shifts `[0, 1/2)` onto `[1/2, 1)`; every orbit is transient.
pub fn shift() -> GGiet {
    GGiet::build(&[(Some("A"), r(1, 2)), (None, r(1, 2))], &[(None, r(1, 2)), (Some("A"), r(1, 2))], &[("A", r(1, 1))])
        .unwrap()
}

/// A fixed interval E on `[3/4, 1)` next to a minimal exchange of A–D whose
/// lengths are the Perron vector of a Rauzy loop, in `Q(√2)`.
pub fn fig12() -> GGiet {
    let s2 = Scalar::sqrt_of(2).unwrap();
    let q = |a: Scalar, b: Scalar| (a + b * &s2) * r(3, 4);
    let a = q(r(3, 1), r(-2, 1));
    let b = q(r(-2, 1), r(3, 2));
    let c = q(r(1, 1), r(-1, 2));
    let d = q(r(-1, 1), r(1, 1));
    let e = r(1, 4);
    GGiet::build(
        &[
            (Some("A"), a.clone()),
            (Some("B"), b.clone()),
            (Some("C"), c.clone()),
            (Some("D"), d.clone()),
            (Some("E"), e.clone()),
        ],
        &[(Some("D"), d), (Some("C"), c), (Some("B"), b), (Some("A"), a), (Some("E"), e)],
        &ones(&["A", "B", "C", "D", "E"]),
    )
    .unwrap()
}

/// Five letters with slopes 2, 1/2, 1, 1, 1, invariant under `x ↦ 1 − x`
/// exchanging the lines with A ↔ B and X ↔ Y. `pink` is the length of P.
pub fn disco(pink: Scalar) -> GGiet {
    let a = r(1, 10);
    let x = (Scalar::one() - &a * r(3, 1) - &pink) / r(2, 1);
    let len = |s: &str| match s {
        "A" => a.clone(),
        "B" => &a * r(2, 1),
        "X" | "Y" => x.clone(),
        _ => pink.clone(),
    };
    let swap = |s: &'static str| match s {
        "A" => "B",
        "B" => "A",
        "X" => "Y",
        "Y" => "X",
        o => o,
    };
    let top = ["P", "X", "Y", "B", "A"];
    let t: Vec<_> = top.iter().map(|s| (Some(*s), len(s))).collect();
    let b: Vec<_> = top.iter().rev().map(|s| (Some(swap(s)), len(s))).collect();
    GGiet::build(&t, &b, &[("A", r(2, 1)), ("B", r(1, 2)), ("X", r(1, 1)), ("Y", r(1, 1)), ("P", r(1, 1))]).unwrap()
}

/// Slopes 2 and 1/2 on A = [0, a), B = [a, 1); the bottom line is B, A and
/// one trailing gap.
pub fn two_half(a: &Scalar) -> GGiet {
    let b = Scalar::one() - a;
    let g = Scalar::one() - &b / r(2, 1) - a * r(2, 1);
    GGiet::build(
        &[(Some("A"), a.clone()), (Some("B"), b.clone())],
        &[(Some("B"), &b / r(2, 1)), (Some("A"), a * r(2, 1)), (None, g)],
        &[("A", r(2, 1)), ("B", r(1, 2))],
    )
    .unwrap()
}

/// The corpus, by name.
pub fn corpus() -> Vec<(&'static str, GGiet)> {
    vec![
        ("r13", rotation(r(1, 3))),
        ("r25", rotation(r(2, 5))),
        ("golden", golden()),
        ("cyl", cyl()),
        ("shift", shift()),
        ("fig12", fig12()),
        ("disco", disco(r(2, 9))),
    ]
}

/// Transition, domains and the unresolved part are pairwise disjoint and
/// cover `[0, L)`.
pub fn assert_tiles(rep: &DecompositionReport) {
    let mut parts: Vec<IntervalSet> = vec![rep.transition_set()];
    parts.extend((0..rep.domains.len()).map(|i| rep.region_set(i)));
    if let Some(u) = &rep.unresolved {
        parts.push(IntervalSet::from_intervals(u.region.clone()));
    }
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            assert!(parts[i].is_disjoint(&parts[j]), "parts {} and {} overlap", i, j);
        }
    }
    let total: Scalar = parts.iter().map(|p| p.measure()).sum();
    assert_eq!(&total, rep.input.ambient());
    let union = parts.iter().fold(IntervalSet::empty(), |a, b| a.union(b));
    assert_eq!(union, IntervalSet::from_interval(Interval::new(Scalar::zero(), rep.input.ambient().clone())));
}

/// A random map with up to five letters and its decomposition. Every third
/// one is affine with slopes 1/2, 1, 2 and gets only 20 induction steps.
pub fn random_report<R: Rng>(rng: &mut R, i: usize) -> (GGiet, DecompositionReport) {
    let d = rng.gen_range(1..=5);
    if i % 3 == 2 {
        let m = random_dyadic_map(rng, d);
        let rep = decompose(&m, 0, 20).unwrap();
        (m, rep)
    } else {
        let m = random_map(rng, d, true, false);
        let rep = decompose(&m, 0, 200).unwrap();
        (m, rep)
    }
}
