//! Canonical deviation sweep against the truthful profile.
use signal_elicit::equilibrium::{check_equilibrium, first_choices, overall_verdict, truthful_profile};
use signal_elicit::mechanism::Setting;
use signal_elicit::model::{JointDist, ModelSpec, Prior, SignalSpace};
use signal_elicit::rational::{q, qi};
use signal_elicit::scoring::ScoringRule;

fn main() -> signal_elicit::Result<()> {
    let space = SignalSpace::uniform_labels(2, &["a", "b"])?;
    let d1 = JointDist::new(&space, [(vec![0, 0], q(3, 8)), (vec![0, 1], q(1, 8)), (vec![1, 0], q(1, 8)), (vec![1, 1], q(3, 8))])?;
    let d2 = JointDist::new(&space, [(vec![0, 0], q(1, 8)), (vec![0, 1], q(3, 8)), (vec![1, 0], q(3, 8)), (vec![1, 1], q(1, 8))])?;
    let spec = ModelSpec::new(space, vec!["same".into(), "opposite".into()], vec![vec![d1], vec![d2]])?;
    let setting = Setting::new(spec, Prior::uniform(2), ScoringRule::Quadratic)?;
    let profile = truthful_profile(&setting.spec, &first_choices(&setting.spec), qi(1))?;

    let reports = check_equilibrium(&setting, &profile, 7)?;
    for r in &reports {
        let min = r.min_gap.as_ref().map(|g| g.render()).unwrap_or_else(|| "-".into());
        println!("{:?}: {} deviations, min gap {min}, {:?}", r.player, r.rows.len(), r.verdict);
    }
    println!("overall: {:?}", overall_verdict(&reports));
    Ok(())
}
