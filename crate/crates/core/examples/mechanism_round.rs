//! Seeded rounds of the mechanism under the truthful profile.
use signal_elicit::equilibrium::{first_choices, truthful_profile};
use signal_elicit::mechanism::{round_rng, run_round, Setting};
use signal_elicit::model::{JointDist, ModelSpec, Prior, SignalSpace};
use signal_elicit::rational::{q, qi};
use signal_elicit::scoring::ScoringRule;

fn main() -> signal_elicit::Result<()> {
    let space = SignalSpace::uniform_labels(3, &["a", "b"])?;
    let tight = JointDist::new(&space, [(vec![0, 0, 0], q(1, 2)), (vec![1, 1, 1], q(1, 2))])?;
    let loose = JointDist::new(&space, space.tuples().into_iter().map(|t| (t, q(1, 8))))?;
    let spec = ModelSpec::new(space, vec!["x1".into(), "x2".into()], vec![vec![tight], vec![loose]])?;
    let setting = Setting::new(spec, Prior::uniform(2), ScoringRule::shifted_quadratic())?;
    let profile = truthful_profile(&setting.spec, &first_choices(&setting.spec), qi(1))?;

    for k in 0..5 {
        let out = run_round(&setting, &profile, &mut round_rng(42, k))?;
        let rec = out.record(&setting.spec);
        let obs: Vec<String> = rec.payoffs.observers.iter().map(|p| p.render()).collect();
        println!("round {k}: x={} y={:?} pairs={:?} source={} observers={:?}", rec.x, rec.y, rec.pairing, rec.payoffs.source.render(), obs);
    }
    Ok(())
}
