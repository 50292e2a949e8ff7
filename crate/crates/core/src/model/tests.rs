use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::random::{random_dist, random_spec, SpecShape};
use crate::rational::{one, q, Q};

fn ab2() -> SignalSpace {
    SignalSpace::uniform_labels(2, &["a", "b"]).unwrap()
}

fn spec(sets: Vec<Vec<JointDist>>) -> ModelSpec {
    let values = (0..sets.len()).map(|i| format!("x{}", i + 1)).collect();
    ModelSpec::new(ab2(), values, sets).unwrap()
}

fn uniform4() -> JointDist {
    JointDist::uniform(2, &ab2().tuples())
}

#[test]
fn spec_requires_two_values() {
    let err = ModelSpec::new(ab2(), vec!["x".into()], vec![vec![uniform4()]]);
    assert!(matches!(err, Err(Error::InvalidSpec(_))));
    assert!(SignalSpace::uniform_labels(1, &["a"]).is_err());
    assert!(SignalSpace::new(vec![vec!["a".into(), "a".into()], vec!["b".into()]]).is_err());
}

#[test]
fn duplicates_within_a_set_merge() {
    let m = spec(vec![vec![uniform4(), uniform4()], vec![JointDist::point_mass(vec![0, 0])]]);
    assert_eq!(m.lset(0).len(), 1);
}

#[test]
fn identifiability_examples() {
    let m = spec(vec![vec![JointDist::point_mass(vec![0, 0])], vec![JointDist::point_mass(vec![1, 1])]]);
    assert!(is_source_identifiable(&m).identifiable);

    let m = spec(vec![vec![uniform4()], vec![uniform4()]]);
    let r = is_source_identifiable(&m);
    assert!(!r.identifiable);
    let w = r.witness.unwrap();
    assert_eq!((w.x1, w.x2), (0, 1));
    assert_eq!(w.dist, uniform4());

    // One cell moved by 1/1000: arbitrarily close but not identical.
    let s = ab2();
    let near = JointDist::new(
        &s,
        [
            (vec![0, 0], q(1, 4) + q(1, 1000)),
            (vec![0, 1], q(1, 4) - q(1, 1000)),
            (vec![1, 0], q(1, 4)),
            (vec![1, 1], q(1, 4)),
        ],
    )
    .unwrap();
    assert!(is_source_identifiable(&spec(vec![vec![uniform4()], vec![near]])).identifiable);
}

#[test]
fn technical_condition_examples() {
    let m = spec(vec![vec![JointDist::point_mass(vec![0, 0])], vec![JointDist::point_mass(vec![1, 1])]]);
    assert!(check_technical_condition(&m).is_ok());

    let ind = JointDist::product(&[
        SignalDist::from([(0, q(1, 3)), (1, q(2, 3))]),
        SignalDist::from([(0, q(1, 2)), (1, q(1, 2))]),
    ]);
    let v = check_technical_condition(&spec(vec![vec![ind], vec![JointDist::point_mass(vec![0, 0])]]))
        .unwrap_err();
    assert_eq!((v.x, v.observer, v.signal, v.other_signal), (0, 0, 0, 1));

    let corr = JointDist::new(&ab2(), [(vec![0, 0], q(1, 2)), (vec![1, 1], q(1, 2))]).unwrap();
    assert!(check_technical_condition(&spec(vec![vec![corr], vec![uniform4()]])).is_err());
    let corr = JointDist::new(&ab2(), [(vec![0, 0], q(1, 2)), (vec![1, 1], q(1, 2))]).unwrap();
    let other = JointDist::new(&ab2(), [(vec![0, 0], q(1, 4)), (vec![1, 1], q(3, 4))]).unwrap();
    assert!(check_technical_condition(&spec(vec![vec![corr], vec![other]])).is_ok());
}

#[test]
fn refinement_examples() {
    let m = spec(vec![vec![uniform4()], vec![JointDist::point_mass(vec![0, 1])]]);
    assert_eq!(coalition_refinement(&m, &BTreeSet::new()).unwrap(), m);

    let fac = |p: Q| SignalDist::from([(0, p.clone()), (1, one() - p)]);
    let m = spec(vec![
        vec![JointDist::product(&[fac(q(1, 3)), fac(q(1, 2))])],
        vec![JointDist::product(&[fac(q(2, 3)), fac(q(1, 4))])],
    ]);
    let r = coalition_refinement(&m, &BTreeSet::from([1])).unwrap();
    assert_eq!(r.n(), 1);
    assert_eq!(r.lset(0), &[JointDist::product(&[fac(q(1, 3))])]);
    assert_eq!(r.lset(1), &[JointDist::product(&[fac(q(2, 3))])]);

    assert!(coalition_refinement(&m, &BTreeSet::from([0, 1])).is_err());
    assert!(coalition_refinement(&m, &BTreeSet::from([5])).is_err());
}

#[test]
fn refinement_can_merge_within_set() {
    let m = spec(vec![
        vec![JointDist::point_mass(vec![0, 0]), JointDist::point_mass(vec![0, 1])],
        vec![JointDist::point_mass(vec![1, 1])],
    ]);
    let r = coalition_refinement(&m, &BTreeSet::from([1])).unwrap();
    assert_eq!(r.lset(0).len(), 1);
}

#[test]
fn lookup_examples() {
    let m = spec(vec![vec![JointDist::point_mass(vec![0, 0])], vec![JointDist::point_mass(vec![1, 1])]]);
    assert_eq!(lookup_source(&m, &JointDist::point_mass(vec![0, 0])).unwrap(), Some(0));
    assert_eq!(lookup_source(&m, &uniform4()).unwrap(), None);
    let bad = spec(vec![vec![uniform4()], vec![uniform4()]]);
    assert!(matches!(lookup_source(&bad, &uniform4()), Err(Error::NonIdentifiable(_))));
}

/// Brute-force oracle: compare every cross-set pair cell by cell over the full tuple grid.
fn oracle_identifiable(m: &ModelSpec) -> bool {
    let tuples = m.space().tuples();
    for x1 in 0..m.values().len() {
        for x2 in 0..m.values().len() {
            if x1 == x2 {
                continue;
            }
            for a in m.lset(x1) {
                for b in m.lset(x2) {
                    if tuples.iter().all(|t| a.prob(t) == b.prob(t)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[test]
fn identifiability_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shape = SpecShape::default();
    let mut seen = [0usize; 2];
    for _ in 0..300 {
        let m = random_spec(&mut rng, &shape);
        let got = is_source_identifiable(&m).identifiable;
        assert_eq!(got, oracle_identifiable(&m));
        seen[got as usize] += 1;
    }
    assert!(seen[0] > 20 && seen[1] > 20, "{seen:?}");
}

#[test]
fn lookup_recovers_every_member() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shape = SpecShape { share_prob: 0.0, ..SpecShape::default() };
    for _ in 0..100 {
        let m = random_spec(&mut rng, &shape);
        if !m.is_identifiable() {
            continue;
        }
        for x in 0..m.values().len() {
            for d in m.lset(x) {
                assert_eq!(lookup_source(&m, d).unwrap(), Some(x));
            }
        }
    }
}

proptest! {
    #[test]
    fn chain_rule_and_normalization(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = SpecShape { observers: (2, 4), signals: (1, 3), ..SpecShape::default() };
        let space = crate::random::random_space(&mut rng, &shape);
        let d = random_dist(&mut rng, &space, 12);
        prop_assert!(d.validate(&space).is_ok());
        for i in 0..space.n() {
            let m = d.marginal(i).unwrap();
            prop_assert_eq!(m.values().fold(Q::from_integer(0.into()), |a, b| a + b), one());
            let mut rebuilt = Vec::new();
            for (&y, py) in &m {
                let c = d.conditional(i, y).unwrap();
                for (rest, pc) in c.iter() {
                    let mut t = rest.clone();
                    t.insert(i, y);
                    rebuilt.push((t, py * pc));
                }
            }
            prop_assert_eq!(JointDist::from_entries(space.n(), rebuilt), d.clone());
        }
    }

    #[test]
    fn refinement_preserves_non_identifiability(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = SpecShape { share_prob: 0.5, ..SpecShape::default() };
        let m = random_spec(&mut rng, &shape);
        prop_assert_eq!(coalition_refinement(&m, &BTreeSet::new()).unwrap(), m.clone());
        if !m.is_identifiable() {
            for drop in 0..m.n() {
                let r = coalition_refinement(&m, &BTreeSet::from([drop])).unwrap();
                prop_assert!(!is_source_identifiable(&r).identifiable);
            }
        }
    }
}
