//! Honesty injection: a sliver of honest partners breaks pooling and garbling.
use signal_elicit::equilibrium::{first_choices, honesty_injection, truthful_profile};
use signal_elicit::mechanism::Setting;
use signal_elicit::model::{JointDist, ModelSpec, Prior, SignalSpace};
use signal_elicit::rational::{fmt_q, q, qi};
use signal_elicit::scoring::ScoringRule;
use signal_elicit::strategy::{ObserverStrategy, StrategyProfile};

fn garbled(p: &StrategyProfile, s: ObserverStrategy) -> StrategyProfile {
    (0..p.observers.len()).fold(p.clone(), |acc, i| acc.with_observer(i, ObserverStrategy { x: p.observers[i].x.clone(), ..s.clone() }))
}

fn main() -> signal_elicit::Result<()> {
    let space = SignalSpace::uniform_labels(2, &["a", "b"])?;
    let noisy = JointDist::new(&space, [(vec![0, 0], q(2, 5)), (vec![0, 1], q(1, 10)), (vec![1, 0], q(1, 10)), (vec![1, 1], q(2, 5))])?;
    let perfect = JointDist::new(&space, [(vec![0, 0], q(1, 2)), (vec![1, 1], q(1, 2))])?;
    let spec = ModelSpec::new(space, vec!["x1".into(), "x2".into()], vec![vec![noisy], vec![perfect]])?;
    let setting = Setting::new(spec, Prior::uniform(2), ScoringRule::Log)?;
    let truthful = truthful_profile(&setting.spec, &first_choices(&setting.spec), qi(1))?;

    let profiles = [
        ("truthful", truthful.clone()),
        ("pooling", garbled(&truthful, ObserverStrategy::pooling(0))),
        ("uniform", garbled(&truthful, ObserverStrategy::uniform_garbling(2))),
    ];
    for p0 in [q(1, 100), q(1, 10), q(1, 2)] {
        for (name, p) in &profiles {
            let r = honesty_injection(&setting, p, &p0)?;
            let best = r.best.as_ref().map(|b| format!("{} gains {}", b.candidate, b.gain.render())).unwrap_or_default();
            println!("p0={:<5} {name:<8} {:?} {best}", fmt_q(&p0), r.verdict);
        }
    }
    Ok(())
}
