//! When two values share a distribution, a rogue source ties with the truthful one.
use signal_elicit::equilibrium::impossibility_witness;
use signal_elicit::mechanism::Setting;
use signal_elicit::model::{JointDist, ModelSpec, Prior, SignalSpace};
use signal_elicit::rational::q;
use signal_elicit::scoring::ScoringRule;

fn main() -> signal_elicit::Result<()> {
    let space = SignalSpace::uniform_labels(2, &["a", "b"])?;
    let shared = JointDist::new(&space, [(vec![0, 0], q(1, 2)), (vec![1, 1], q(1, 2))])?;
    let other = JointDist::new(&space, space.tuples().into_iter().map(|t| (t, q(1, 4))))?;
    let spec = ModelSpec::new(space, vec!["low".into(), "high".into()], vec![vec![shared.clone()], vec![shared, other]])?;
    let setting = Setting::new(spec, Prior::uniform(2), ScoringRule::Log)?;

    match impossibility_witness(&setting)? {
        Some(w) => println!("{}", serde_json::to_string_pretty(&w).unwrap()),
        None => println!("no shared distribution"),
    }
    Ok(())
}
