use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::rational::qi;

fn grid(k: i64) -> Vec<Q> {
    (1..=k).map(qi).collect()
}

#[test]
fn unthrottled_point_masses() {
    let cfg = BandwidthConfig::new(grid(2), vec![None, None], vec![MenuKind::AllBelow, MenuKind::AllBelow]).unwrap();
    let spec = build_bandwidth_spec(&cfg).unwrap();
    assert_eq!(spec.lset(1).len(), 4);
    assert!(spec.lset(1).contains(&JointDist::point_mass(vec![1, 1])));
    assert!(spec.lset(1).contains(&JointDist::point_mass(vec![0, 0])));
    // all-below menus share δ(1)×δ(1) between both values
    assert!(!spec.is_identifiable());
    let cfg = BandwidthConfig::new(grid(2), vec![None, None], vec![MenuKind::AtCap, MenuKind::AtCap]).unwrap();
    assert!(build_bandwidth_spec(&cfg).unwrap().is_identifiable());
    assert!(demonstrate_non_identifiability(&cfg, ScoringRule::Quadratic).unwrap().is_none());
}

#[test]
fn caps_respected() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..30 {
        let cfg = random_config(&mut rng);
        let spec = build_bandwidth_spec(&cfg).unwrap();
        for (x, set) in spec.lsets().iter().enumerate() {
            for d in set {
                assert!(d.support().all(|t| t.iter().all(|&k| k <= x)));
            }
        }
    }
}

#[test]
fn throttled_witness() {
    let cfg = BandwidthConfig::new(grid(3), vec![Some(qi(1)), Some(qi(1))], vec![MenuKind::AtCap, MenuKind::AtCap]).unwrap();
    let w = demonstrate_non_identifiability(&cfg, ScoringRule::Quadratic).unwrap().unwrap();
    assert_eq!((w.x1.as_str(), w.x2.as_str()), ("3", "2"));
    assert!(w.above_max_throttle);
    assert!(w.tie.score_tie && w.tie.indicator_tie);
}

#[test]
fn estimate_examples() {
    let space = SignalSpace::new(vec![vec!["1".into(), "2".into(), "3".into()]; 2]).unwrap();
    let h = q(1, 2);
    let f = |e: &[(usize, Q)]| -> SignalDist { e.iter().cloned().collect() };
    let d = JointDist::product(&[f(&[(0, Q::one())]), f(&[(0, h.clone()), (1, h.clone())])]);
    assert_eq!(refined_observer_estimate(&space, &d).unwrap(), qi(2));
    let d = JointDist::product(&[f(&[(0, Q::one())]), f(&[(0, Q::one())])]);
    assert_eq!(refined_observer_estimate(&space, &d).unwrap(), qi(1));
    let d = JointDist::product(&[f(&[(0, h.clone()), (1, h.clone())]), f(&[(1, h.clone()), (2, h.clone())])]);
    assert_eq!(refined_observer_estimate(&space, &d).unwrap(), qi(3));
    let corr = JointDist::from_entries(2, [(vec![0, 0], h.clone()), (vec![1, 1], h)]);
    assert!(refined_observer_estimate(&space, &corr).is_err());
}

#[test]
fn held_report_gap_is_one() {
    let cfg = BandwidthConfig::new(grid(3), vec![None, Some(qi(1))], vec![MenuKind::TwoPoint, MenuKind::AtCap]).unwrap();
    let r = quasi_strictness_check(&cfg, ScoringRule::Quadratic, 1).unwrap();
    assert!(r.chosen_reaches_x && r.quasi_strict);
    assert_eq!(r.upward.len(), 1);
    assert_eq!(r.upward[0].held_gap, ExtReal::exact(Q::one()));
    let top = quasi_strictness_check(&cfg, ScoringRule::Quadratic, 2).unwrap();
    assert!(top.upward.is_empty() && top.quasi_strict);
    assert_eq!(top.downward.len(), 2);
}

pub(super) fn random_config<R: Rng>(rng: &mut R) -> BandwidthConfig {
    let k = rng.gen_range(2..=5);
    let g = grid(k);
    let n = rng.gen_range(2..=3);
    let throttles = (0..n).map(|_| if rng.gen_bool(0.4) { Some(g[rng.gen_range(0..k as usize)].clone()) } else { None }).collect();
    let kinds = [MenuKind::AtCap, MenuKind::TwoPoint, MenuKind::AllBelow];
    let menus = (0..n).map(|_| kinds[rng.gen_range(0..if n == 3 { 2 } else { 3 })]).collect();
    BandwidthConfig::new(g, throttles, menus).unwrap()
}

#[test]
fn random_configs_are_quasi_strict() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let cfg = random_config(&mut rng);
        let x = rng.gen_range(0..cfg.grid().len());
        let r = quasi_strictness_check(&cfg, ScoringRule::Quadratic, x).unwrap();
        assert!(r.quasi_strict, "{cfg:?} {r:?}");
        for u in &r.upward {
            if r.chosen_reaches_x {
                assert_eq!(u.held_gap, ExtReal::exact(Q::one()));
            }
        }
    }
}
