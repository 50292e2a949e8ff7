use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mechanism::{collect_reports, Pairing, Setting};
use crate::model::{check_technical_condition, JointDist, ModelSpec, Prior, SignalSpace};
use crate::random::{random_full_support, random_spec, SpecShape};
use crate::rational::{one, q, to_f64, Q};
use crate::scoring::ScoringRule;
use crate::strategy::{ObserverStrategy, SignalRule, SourceAction, XRule};

fn ab2() -> SignalSpace {
    SignalSpace::uniform_labels(2, &["a", "b"]).unwrap()
}

fn dist(entries: &[([usize; 2], Q)]) -> JointDist {
    JointDist::new(&ab2(), entries.iter().map(|(t, p)| (t.to_vec(), p.clone()))).unwrap()
}

fn perfect() -> JointDist {
    dist(&[([0, 0], q(1, 2)), ([1, 1], q(1, 2))])
}

fn noisy() -> JointDist {
    dist(&[([0, 0], q(2, 5)), ([0, 1], q(1, 10)), ([1, 0], q(1, 10)), ([1, 1], q(2, 5))])
}

fn independent() -> JointDist {
    JointDist::uniform(2, &ab2().tuples())
}

fn setting(sets: Vec<Vec<JointDist>>, rule: ScoringRule) -> Setting {
    let k = sets.len();
    let values = (0..k).map(|i| format!("x{}", i + 1)).collect();
    let spec = ModelSpec::new(ab2(), values, sets).unwrap();
    Setting::new(spec, Prior::uniform(k), rule).unwrap()
}

fn correlated_setting() -> Setting {
    setting(vec![vec![perfect()], vec![noisy()]], ScoringRule::Log)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn truthful_profile_requires_identifiability() {
    let s = setting(vec![vec![independent()], vec![independent()]], ScoringRule::Log);
    assert!(truthful_profile(&s.spec, &first_choices(&s.spec), one()).is_err());
    assert!(truthful_profile_with(&s.spec, &first_choices(&s.spec), one(), XRule::FirstMatch).is_ok());
    let s = correlated_setting();
    assert!(truthful_profile(&s.spec, &[noisy(), noisy()], one()).is_err());
}

#[test]
fn truthful_profile_scaling_and_sentinel() {
    let s = setting(
        vec![vec![JointDist::point_mass(vec![0, 0])], vec![JointDist::point_mass(vec![1, 1])]],
        ScoringRule::Log,
    );
    let pairing = Pairing::from_groups(2, vec![vec![0, 1]]).unwrap();
    let p = truthful_profile(&s.spec, &first_choices(&s.spec), q(1, 2)).unwrap();
    let b = collect_reports(&s, &p, 0, &[0, 0], vec![0, 0], pairing.clone()).unwrap();
    assert_eq!(b.pi, vec![q(1, 2), q(1, 2)]);
    assert_eq!(b.xhat_obs, vec![Some(0), Some(0)]);
    let off = independent();
    let p = p.with_source_action(0, SourceAction { choose: off.clone(), xhat: 0, dhat: off });
    let b = collect_reports(&s, &p, 0, &[0, 1], vec![0, 1], pairing).unwrap();
    assert_eq!(b.xhat_obs, vec![None, None]);
}

#[test]
fn independent_observers_expect_one() {
    let other = JointDist::point_mass(vec![0, 0]);
    let s = setting(vec![vec![independent()], vec![other]], ScoringRule::Log);
    let p = truthful_profile(&s.spec, &first_choices(&s.spec), one()).unwrap();
    let e = conditional_payoffs(&s, &p, 0).unwrap();
    for v in &e.observers {
        assert!(close(v.to_f64(), 1.0), "{v}");
    }
    let p = StrategyProfile { c: q(1, 4), ..p };
    let e = conditional_payoffs(&s, &p, 0).unwrap();
    assert!(close(e.observers[0].to_f64(), 1.0 + 4f64.ln()));
}

#[test]
fn correlated_observers_expect_ln2_plus_one() {
    let s = correlated_setting();
    let p = truthful_profile(&s.spec, &first_choices(&s.spec), one()).unwrap();
    let e = conditional_payoffs(&s, &p, 0).unwrap();
    for v in &e.observers {
        assert!(close(v.to_f64(), 2f64.ln() + 1.0), "{v}");
    }
    let garbled = p.with_observer(0, ObserverStrategy::uniform_garbling(2)).with_observer(1, ObserverStrategy::uniform_garbling(2));
    let g = conditional_payoffs(&s, &garbled, 0).unwrap();
    assert!(g.observers[0].to_f64() < e.observers[0].to_f64());
}

#[test]
fn source_value_misreport_loses_indicator() {
    let s = setting(
        vec![vec![JointDist::point_mass(vec![0, 0])], vec![JointDist::point_mass(vec![1, 1])]],
        ScoringRule::Quadratic,
    );
    let p = truthful_profile(&s.spec, &first_choices(&s.spec), one()).unwrap();
    let devs = canonical_deviations(&s, &p, Player::Source, 1).unwrap();
    let rep = deviation_gaps(&s, &p, Player::Source, &devs).unwrap();
    let xs: Vec<_> = rep.rows.iter().filter(|r| r.tag == DeviationTag::XMisreport).collect();
    assert!(!xs.is_empty());
    for r in xs {
        assert_eq!(r.gap, crate::extreal::ExtReal::exact(one()));
    }
    assert_eq!(rep.verdict, Verdict::Strict);
}

#[test]
fn observer_signal_permutation_strictly_loses() {
    let s = correlated_setting();
    let p = truthful_profile(&s.spec, &first_choices(&s.spec), one()).unwrap();
    let swap = ObserverStrategy { signal: SignalRule::Map([(0, 1), (1, 0)].into_iter().collect()), ..ObserverStrategy::truthful() };
    let dev = Deviation {
        tag: DeviationTag::SignalMisreport,
        description: "swap".into(),
        change: Change::Observer { i: 0, strategy: swap },
        within_feasible_set: false,
    };
    let rep = deviation_gaps(&s, &p, Player::Observer(0), &[dev]).unwrap();
    assert_eq!(rep.verdict, Verdict::Strict);
}

#[test]
fn log_rule_lets_a_high_entropy_type_escape_the_spec() {
    // H(noisy) > 1, so an off-spec point mass scores more than truthful score plus indicator.
    let s = correlated_setting();
    let p = truthful_profile(&s.spec, &first_choices(&s.spec), one()).unwrap();
    let pm = JointDist::point_mass(vec![0, 1]);
    let dev = Deviation {
        tag: DeviationTag::DMisreport,
        description: "point mass".into(),
        change: Change::Source { x: 1, action: SourceAction { choose: pm.clone(), xhat: 1, dhat: pm } },
        within_feasible_set: false,
    };
    let rep = deviation_gaps(&s, &p, Player::Source, &[dev]).unwrap();
    assert_eq!(rep.verdict, Verdict::Refuted);
    let entropy = -(0.8 * 0.4f64.ln() + 0.2 * 0.1f64.ln());
    assert!(close(rep.rows[0].gap.to_f64(), 1.0 - entropy));
}

#[test]
fn canonical_check_is_strict_on_correlated_spec() {
    for rule in [ScoringRule::Quadratic, ScoringRule::ShiftedQuadratic { shift: q(1, 2) }] {
        let s = setting(vec![vec![perfect()], vec![noisy()]], rule);
        let p = truthful_profile(&s.spec, &first_choices(&s.spec), one()).unwrap();
        let reps = check_equilibrium(&s, &p, 7).unwrap();
        for r in &reps {
            assert_eq!(r.verdict, Verdict::Strict, "{:?} {:?}", r.player, r.min_gap);
        }
        assert_eq!(overall_verdict(&reps), Verdict::Strict);
    }
}

#[test]
fn canonical_check_is_strict_on_random_conforming_specs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shape = SpecShape { observers: (2, 3), signals: (2, 3), values: (2, 3), per_set: (1, 2), share_prob: 0.0, full_support: true };
    let mut checked = 0;
    while checked < 4 {
        let spec = random_spec(&mut rng, &shape);
        if !spec.is_identifiable() || check_technical_condition(&spec).is_err() {
            continue;
        }
        let k = spec.values().len();
        let s = Setting::new(spec, Prior::uniform(k), ScoringRule::Quadratic).unwrap();
        let p = truthful_profile(&s.spec, &first_choices(&s.spec), one()).unwrap();
        let reps = check_equilibrium(&s, &p, checked).unwrap();
        assert_eq!(overall_verdict(&reps), Verdict::Strict, "{:?}", reps.iter().map(|r| (&r.player, &r.min_gap)).collect::<Vec<_>>());
        checked += 1;
    }
}

#[test]
fn tie_witness_on_shared_distribution() {
    let s = setting(vec![vec![independent(), perfect()], vec![independent(), noisy()]], ScoringRule::Log);
    let w = impossibility_witness(&s).unwrap().unwrap();
    assert_eq!((w.x1.as_str(), w.x2.as_str()), ("x1", "x2"));
    assert!(w.score_tie && w.indicator_tie && w.mirror_tie && w.not_strict);
    let id = correlated_setting();
    assert!(impossibility_witness(&id).unwrap().is_none());
}

#[test]
fn honesty_injection_refutes_pooling_and_garbling() {
    let s = setting(vec![vec![noisy()], vec![perfect()]], ScoringRule::Log);
    let p = truthful_profile(&s.spec, &first_choices(&s.spec), one()).unwrap();
    let pooled = p.with_observer(0, ObserverStrategy::pooling(0)).with_observer(1, ObserverStrategy::pooling(0));
    let garbled = p.with_observer(0, ObserverStrategy::uniform_garbling(2)).with_observer(1, ObserverStrategy::uniform_garbling(2));
    for p0 in [q(1, 100), q(1, 10), q(1, 2)] {
        assert_eq!(honesty_injection(&s, &pooled, &p0).unwrap().verdict, HonestyVerdict::Refuted);
        assert_eq!(honesty_injection(&s, &garbled, &p0).unwrap().verdict, HonestyVerdict::Refuted);
        let t = honesty_injection(&s, &p, &p0).unwrap();
        assert_eq!(t.verdict, HonestyVerdict::Survives);
        assert_eq!(t.evaluated, 0);
    }
}

#[test]
fn ir_value_examples() {
    let c1 = one();
    assert!(close(observer_ir_value(&independent(), 0, 0, &c1).unwrap().to_f64(), 0.0));
    assert!(close(observer_ir_value(&perfect(), 0, 0, &c1).unwrap().to_f64(), 2f64.ln()));
    assert!(close(observer_ir_value(&perfect(), 0, 0, &q(1, 2)).unwrap().to_f64(), 2.0 * 2f64.ln()));
    let d = JointDist::point_mass(vec![0, 0]);
    assert!(observer_ir_value(&d, 0, 1, &c1).is_err());
}

fn kl_oracle(d: &JointDist, i: usize, y: usize, c: f64) -> f64 {
    // direct sums over the joint table in floating point
    let n = d.arity();
    let mut total = 0.0;
    for j in (0..n).filter(|&j| j != i) {
        let mut pij = std::collections::HashMap::new();
        let mut pj = std::collections::HashMap::new();
        let mut pi = 0.0;
        for (t, p) in d.iter() {
            let p = to_f64(p);
            *pj.entry(t[j]).or_insert(0.0) += p;
            if t[i] == y {
                pi += p;
                *pij.entry(t[j]).or_insert(0.0) += p;
            }
        }
        let mut kl = 0.0;
        for (s, p) in &pij {
            let post: f64 = p / pi;
            if post > 0.0 {
                kl += post * (post / pj[s]).ln();
            }
        }
        total += kl;
    }
    total / (n - 1) as f64 - c.ln()
}

#[test]
fn ir_value_matches_kl_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(2..=3);
        let labels: Vec<Vec<String>> = (0..n).map(|_| (0..rng.gen_range(2..=3)).map(|k| format!("s{k}")).collect()).collect();
        let space = SignalSpace::new(labels).unwrap();
        let d = if rng.gen_bool(0.5) { random_full_support(&mut rng, &space, 9) } else { crate::random::random_dist(&mut rng, &space, 9) };
        let i = rng.gen_range(0..n);
        let y = *d.marginal(i).unwrap().keys().next().unwrap();
        let c = q(1, rng.gen_range(1..=8));
        let v = observer_ir_value(&d, i, y, &c).unwrap();
        assert!((v.to_f64() - kl_oracle(&d, i, y, to_f64(&c))).abs() < 1e-9);
        if c == one() {
            assert!(v.to_f64() >= -1e-12);
        }
    }
}

#[test]
fn total_payoff_examples() {
    let s = correlated_setting();
    let p = truthful_profile(&s.spec, &first_choices(&s.spec), one()).unwrap();
    let pooled = p.with_observer(0, ObserverStrategy::pooling(0)).with_observer(1, ObserverStrategy::pooling(0));
    let r = total_payoff_comparison(&s, &p, &pooled).unwrap();
    assert!(r.gap.to_f64() > 0.0);
    assert_eq!(r.witness_c.as_deref(), Some("1"));
    assert_eq!(total_payoff_gap(&s, &p, &p).unwrap().to_f64(), 0.0);

    // everyone agrees on the wrong value
    let mut wrong = p.clone();
    for x in 0..2 {
        let a = &p.source[x];
        wrong = wrong.with_source_action(x, SourceAction { xhat: 1 - x, ..a.clone() });
    }
    for i in 0..2 {
        wrong = wrong.with_observer(i, ObserverStrategy { x: XRule::Fixed(None), ..ObserverStrategy::truthful() });
    }
    let fixed: Vec<_> = (0..2).map(|_| ObserverStrategy { x: XRule::Fixed(Some(0)), ..ObserverStrategy::truthful() }).collect();
    let wrong = StrategyProfile { observers: fixed, ..wrong };
    let r = total_payoff_comparison(&s, &p, &wrong).unwrap();
    assert!(r.witness_c.is_some());
}

#[test]
fn collusion_examples() {
    let s = correlated_setting();
    let r = collusion_analysis(&s.spec, &BTreeSet::new()).unwrap();
    assert!(r.identifiable_before && r.identifiable_after);
    // both sets have uniform marginals, so a single remaining observer cannot tell them apart
    let r = collusion_analysis(&s.spec, &BTreeSet::from([0])).unwrap();
    assert!(!r.identifiable_after);
    assert!(r.witness.is_some());
}
