//! Total payoff of the truthful profile against a garbled one over the grid of c.
use signal_elicit::equilibrium::{first_choices, total_payoff_comparison, truthful_profile};
use signal_elicit::mechanism::Setting;
use signal_elicit::model::{JointDist, ModelSpec, Prior, SignalSpace};
use signal_elicit::rational::{q, qi};
use signal_elicit::scoring::ScoringRule;
use signal_elicit::strategy::ObserverStrategy;

fn main() -> signal_elicit::Result<()> {
    let space = SignalSpace::uniform_labels(2, &["a", "b"])?;
    let d1 = JointDist::new(&space, [(vec![0, 0], q(2, 5)), (vec![0, 1], q(1, 10)), (vec![1, 0], q(1, 10)), (vec![1, 1], q(2, 5))])?;
    let d2 = JointDist::new(&space, [(vec![0, 0], q(1, 2)), (vec![1, 1], q(1, 2))])?;
    let spec = ModelSpec::new(space, vec!["x1".into(), "x2".into()], vec![vec![d1], vec![d2]])?;
    let setting = Setting::new(spec, Prior::uniform(2), ScoringRule::Quadratic)?;
    let truthful = truthful_profile(&setting.spec, &first_choices(&setting.spec), qi(1))?;
    let mut garbled = truthful.clone();
    for i in 0..2 {
        let x = truthful.observers[i].x.clone();
        garbled = garbled.with_observer(i, ObserverStrategy { x, ..ObserverStrategy::pooling(0) });
    }
    let r = total_payoff_comparison(&setting, &truthful, &garbled)?;
    println!("{}", serde_json::to_string_pretty(&r).unwrap());
    Ok(())
}
