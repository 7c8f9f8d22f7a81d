mod common;

use common::{assert_tiles, corpus, disco, r, random_report};
use giet::decompose::{check_bounds, cross_validate, decompose, DecompositionReport, DomainKind};
use giet::io::ReportFile;
use giet::orbit::{classify_orbit, iterate_point, Classification};
use giet::{GGiet, Interval, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn set(v: &[(Scalar, Scalar)]) -> Vec<Interval> {
    v.iter().map(|(a, b)| Interval::new(a.clone(), b.clone())).collect()
}

#[test]
fn corpus_decompositions() {
    // name, p, q, transition
    let expected: Vec<(&str, usize, usize, Vec<Interval>)> = vec![
        ("r13", 1, 0, vec![]),
        ("r25", 1, 0, vec![]),
        ("golden", 0, 1, vec![]),
        ("cyl", 1, 0, set(&[(r(0, 1), r(1, 4)), (r(3, 4), r(1, 1))])),
        ("shift", 0, 0, set(&[(r(0, 1), r(1, 1))])),
        ("fig12", 1, 1, vec![]),
        ("disco", 2, 0, set(&[(r(2, 9), r(7, 9))])),
    ];
    for ((name, m), (ename, p, q, d)) in corpus().into_iter().zip(expected) {
        assert_eq!(name, ename);
        let rep = decompose(&m, 0, 200).unwrap();
        assert!(rep.certified, "{}", name);
        assert_eq!((rep.p, rep.q), (p, q), "{}", name);
        assert_eq!(rep.transition, d, "{}", name);
        assert_tiles(&rep);
        for dom in &rep.domains {
            match &dom.kind {
                DomainKind::Periodic { .. } => assert_eq!(dom.base.d(), 1, "{}", name),
                DomainKind::Quasiminimal { d_i, .. } => assert!(*d_i >= 2, "{}", name),
            }
        }
        let b = check_bounds(&rep);
        assert!(b.weak_ok && b.ergodic_ok, "{}: {:?}", name, b);
        let v = cross_validate(&rep, 30, 10_000);
        assert!(v.clean(), "{}: {:?}", name, v.contradictions);

        let file = ReportFile::new(rep, Some(v));
        assert_eq!(ReportFile::parse(&file.to_json()).unwrap(), file, "{}", name);
    }
}

#[test]
fn periods_follow_the_orbit_oracle() {
    for (name, m, period) in [("r13", common::rotation(r(1, 3)), 3), ("r25", common::rotation(r(2, 5)), 5)] {
        let rep = decompose(&m, 0, 200).unwrap();
        match &rep.domains[0].kind {
            DomainKind::Periodic { period: p, .. } => assert_eq!(*p, period, "{}", name),
            k => panic!("{}: {:?}", name, k),
        }
        let rec = classify_orbit(&m, &r(1, 7), 100).unwrap();
        assert_eq!(rec.classification, Classification::Periodic { period });
    }
}

#[test]
fn disco_has_an_attracting_and_a_repelling_cylinder() {
    let m = disco(r(2, 9));
    let rep = decompose(&m, 0, 200).unwrap();
    assert!(rep.domains.iter().all(|d| matches!(d.kind, DomainKind::Periodic { .. })));
    let mut slopes = slopes_of(&rep);
    slopes.sort();
    assert!(slopes[0] < Scalar::one() && slopes[1] > Scalar::one(), "{:?}", slopes);

    // The map has no gaps, so no orbit is finite. Oracle for 100 evenly
    // spread points, from exact orbit walks only: every orbit off the cycles
    // runs from the repelling cycle to the attracting one, the attracting
    // region is forward invariant, the repelling one backward invariant.
    let (att, rep_i) = if slopes_of(&rep)[0] < Scalar::one() { (0, 1) } else { (1, 0) };
    let cycle = |i: usize| -> Vec<Scalar> {
        let a = match &rep.domains[i].kind {
            DomainKind::Periodic { anchor, period, .. } => {
                let rec = classify_orbit(&m, anchor, period + 1).unwrap();
                assert_eq!(rec.classification, Classification::Periodic { period: *period });
                anchor.clone()
            }
            _ => unreachable!(),
        };
        let b = iterate_point(&m, &a, 1).unwrap();
        vec![a, b]
    };
    let (ca, cr) = (cycle(att), cycle(rep_i));
    let inv = m.invert();
    let eps = Scalar::ratio(1, 1 << 30);
    let near = |x: &Scalar, c: &[Scalar]| c.iter().any(|y| (x - y).abs() < eps);
    let walk = |g: &GGiet, x: &Scalar| -> Vec<Scalar> {
        let mut v = vec![x.clone()];
        for _ in 0..150 {
            let y = iterate_point(g, v.last().unwrap(), 1).expect("no gaps");
            v.push(y);
        }
        v
    };
    let dset = rep.transition_set();
    let (ra, rr) = (rep.region_set(att), rep.region_set(rep_i));
    let mut counts = [0; 3];
    for k in 0..100 {
        let x = r(2 * k + 1, 200);
        let fwd = walk(&m, &x);
        let bwd = walk(&inv, &x);
        if !cr.contains(&x) {
            assert!(near(fwd.last().unwrap(), &ca), "{} not attracted", x);
        }
        if !ca.contains(&x) {
            assert!(near(bwd.last().unwrap(), &cr), "{} not repelled", x);
        }
        if dset.contains(&x) {
            counts[0] += 1;
            assert!(!fwd[1..].contains(&x), "{} periodic", x);
        } else if ra.contains(&x) {
            counts[1] += 1;
            assert!(fwd.iter().all(|y| ra.contains(y)), "{} leaves the attracting region", x);
        } else {
            assert!(rr.contains(&x));
            counts[2] += 1;
            assert!(bwd.iter().all(|y| rr.contains(y)), "{} leaves the repelling region backward", x);
        }
    }
    assert!(counts.iter().all(|&c| c >= 10), "{:?}", counts);
}

fn slopes_of(rep: &DecompositionReport) -> Vec<Scalar> {
    rep.domains.iter().map(|d| d.base.branch(d.base.alphabet().iter().next().unwrap()).unwrap().0).collect()
}

#[test]
fn random_maps_tile_and_validate() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut certified = 0;
    for i in 0..50 {
        let (m, rep) = random_report(&mut rng, i);
        assert_eq!(rep.input, m);
        assert_tiles(&rep);
        if rep.certified {
            certified += 1;
            assert!(check_bounds(&rep).weak_ok);
            let v = cross_validate(&rep, 10, 2_000);
            assert!(v.clean(), "map {}: {:?}", i, v.contradictions);
        }
    }
    assert!(certified >= 30, "{}", certified);
}
