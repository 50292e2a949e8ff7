use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::check_technical_condition;
use crate::rational::{one, q, qi};

fn pt(c: &[(i64, i64)]) -> Point {
    c.iter().map(|&(a, b)| q(a, b)).collect()
}

fn triangle() -> Vec<Point> {
    vec![pt(&[(0, 1), (0, 1)]), pt(&[(1, 1), (0, 1)]), pt(&[(0, 1), (1, 1)])]
}

#[test]
fn distance_vector_examples() {
    let cfg = LocationConfig::new(triangle(), vec![pt(&[(0, 1), (0, 1)]), pt(&[(1, 4), (1, 4)])]).unwrap();
    assert_eq!(distance_vector(&cfg, &pt(&[(0, 1), (0, 1)])).unwrap().squared, vec![qi(0), qi(1), qi(1)]);
    assert_eq!(distance_vector(&cfg, &pt(&[(1, 4), (1, 4)])).unwrap().squared, vec![q(1, 8), q(5, 8), q(5, 8)]);
    let a = distance_vector(&cfg, &pt(&[(1, 5), (1, 2)])).unwrap().squared;
    let b = distance_vector(&cfg, &pt(&[(1, 2), (1, 5)])).unwrap().squared;
    assert_eq!((a[0].clone(), a[1].clone(), a[2].clone()), (b[0].clone(), b[2].clone(), b[1].clone()));
    assert!(distance_vector(&cfg, &pt(&[(1, 1)])).is_err());
}

#[test]
fn hull_examples() {
    let t = triangle();
    let m = hull_contains(&t, &pt(&[(1, 4), (1, 4)])).unwrap();
    assert!(m.inside);
    assert_eq!(m.lambda.unwrap(), vec![q(1, 2), q(1, 4), q(1, 4)]);
    let m = hull_contains(&t, &pt(&[(2, 1), (2, 1)])).unwrap();
    assert!(!m.inside);
    let u = m.normal.unwrap();
    // direction pointing back toward the triangle
    assert!(u[0] < qi(0) && u[1] < qi(0));
    let m = hull_contains(&t, &t[1]).unwrap();
    assert_eq!(m.lambda.unwrap(), vec![qi(0), one(), qi(0)]);
}

#[test]
fn hull_certificates_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let d = rng.gen_range(1..=3);
        let n = rng.gen_range(2..=5);
        let pts: Vec<Point> = (0..n).map(|_| (0..d).map(|_| q(rng.gen_range(-6..=6), rng.gen_range(1..=3))).collect()).collect();
        let x: Point = (0..d).map(|_| q(rng.gen_range(-6..=6), rng.gen_range(1..=3))).collect();
        // hull_contains verifies its own certificates and errors otherwise
        hull_contains(&pts, &x).unwrap();
    }
}

#[test]
fn interior_candidates_give_singleton_sets() {
    let cfg = LocationConfig::new(
        triangle(),
        vec![pt(&[(1, 4), (1, 4)]), pt(&[(1, 3), (1, 3)]), pt(&[(1, 2), (1, 4)]), pt(&[(0, 1), (0, 1)])],
    )
    .unwrap();
    let spec = build_location_spec(&cfg).unwrap();
    assert!(spec.lsets().iter().all(|l| l.len() == 1));
    assert!(spec.is_identifiable());
    assert!(check_technical_condition(&spec).is_ok());
    let r = check_hull_characterization(&cfg).unwrap();
    assert_eq!(r.verdict, HullVerdict::ForwardHolds);
}

#[test]
fn reverse_construction_example() {
    // u = (3/5, 4/5); x1 = −u/2, x2 = −u
    let cfg = LocationConfig::new(triangle(), vec![pt(&[(-3, 10), (-2, 5)]), pt(&[(-3, 5), (-4, 5)])]).unwrap();
    let v1 = distance_vector(&cfg, &cfg.candidates()[0]).unwrap();
    let v2 = distance_vector(&cfg, &cfg.candidates()[1]).unwrap();
    assert_eq!((v1.squared[0].clone(), v2.squared[0].clone()), (q(1, 4), one()));
    let r = check_hull_characterization(&cfg).unwrap();
    assert_eq!(r.verdict, HullVerdict::ReverseHolds);
    let rev = r.reverse.unwrap();
    assert!(rev.all_positive && rev.shared_vector_in_both_sets);
    assert!(!r.identifiable);
    // origin at 0 and a unit direction u
    let terms = reverse_inequality_terms(&triangle(), &pt(&[(0, 1), (0, 1)]), &pt(&[(3, 5), (4, 5)]), &q(1, 2), &one());
    assert!(terms.iter().all(|t| t > &qi(0)));
}

#[test]
fn straddling_points_give_no_verdict() {
    let cfg = LocationConfig::new(triangle(), vec![pt(&[(-1, 1), (1, 2)]), pt(&[(2, 1), (-1, 2)])]).unwrap();
    let r = check_hull_characterization(&cfg).unwrap();
    assert_eq!(r.verdict, HullVerdict::NoVerdict);
    assert!(r.identifiable);
}

#[test]
fn single_candidate_rejected() {
    assert!(LocationConfig::new(triangle(), vec![pt(&[(0, 1), (0, 1)])]).is_err());
}

#[test]
fn noisy_spec() {
    let inside = LocationConfig::new(triangle(), vec![pt(&[(1, 4), (1, 4)]), pt(&[(1, 3), (1, 3)])]).unwrap();
    let eps = vec![q(1, 1000); 3];
    let s = build_noisy_location_spec(&inside, &eps).unwrap();
    assert!(s.is_identifiable());
    assert_eq!(s.lset(0)[0].support_len(), 2);
    // 1-D, both candidates left of the observers: the farther one's mixture is feasible for both
    let line = LocationConfig::new(vec![vec![qi(0)], vec![qi(1)]], vec![vec![qi(-1)], vec![qi(-2)]]).unwrap();
    let s = build_noisy_location_spec(&line, &[q(1, 2), q(1, 2)]).unwrap();
    let w = crate::model::is_source_identifiable(&s).witness.unwrap();
    assert_eq!((w.x1, w.x2), (0, 1));
    assert!(build_noisy_location_spec(&line, &[qi(2), q(1, 2)]).is_err());
    assert!(build_noisy_location_spec(&line, &[qi(0), q(1, 2)]).is_err());
}

#[test]
fn noisy_labels_are_surds() {
    let cfg = LocationConfig::new(triangle(), vec![pt(&[(1, 4), (1, 4)]), pt(&[(1, 3), (1, 3)])]).unwrap();
    let s = build_noisy_location_spec(&cfg, &[q(1, 10), q(1, 10), q(1, 10)]).unwrap();
    // √(1/8) = 1/4·√2
    assert!(s.space().labels(0).iter().any(|l| l == "1/4*sqrt(2)+1/10"));
}

#[test]
fn collusion_breaks_identifiability() {
    let p = vec![pt(&[(0, 1), (0, 1)]), pt(&[(4, 1), (0, 1)]), pt(&[(0, 1), (4, 1)])];
    let x = vec![pt(&[(1, 1), (1, 1)]), pt(&[(2, 1), (2, 1)]), pt(&[(1, 1), (2, 1)])];
    let cfg = LocationConfig::new(p, x).unwrap();
    let none = location_collusion(&cfg, &BTreeSet::new()).unwrap();
    assert!(none.identifiable_before && none.identifiable_after);
    let r = location_collusion(&cfg, &BTreeSet::from([0])).unwrap();
    assert!(!r.remaining_hull_contains_x);
    assert!(!r.identifiable_after);
    let w = r.witness.unwrap();
    assert_eq!((w.x1.as_str(), w.x2.as_str()), ("(1,1)", "(2,2)"));
}

#[test]
fn lemma_sweep_small() {
    let cfg = LocationConfig::new(triangle(), vec![pt(&[(1, 4), (1, 4)]), pt(&[(1, 3), (1, 3)])]).unwrap();
    let r = verify_distance_lemmas(&cfg, 500, 9).unwrap();
    assert!(r.injectivity_counterexamples.is_empty() && r.dominance_counterexamples.is_empty());
    assert_eq!(r.identity_failures, 0);
    assert!(r.equal_vector_pairs >= 50);
}
