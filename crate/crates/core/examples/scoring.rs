//! Expected scores and properness gaps of the three scoring rules on a two-observer space.
use signal_elicit::model::{JointDist, SignalSpace};
use signal_elicit::rational::q;
use signal_elicit::scoring::ScoringRule;

fn main() -> signal_elicit::Result<()> {
    let space = SignalSpace::uniform_labels(2, &["lo", "hi"])?;
    let truth = JointDist::new(&space, [(vec![0, 0], q(2, 5)), (vec![0, 1], q(1, 10)), (vec![1, 0], q(1, 10)), (vec![1, 1], q(2, 5))])?;
    let flat = JointDist::new(&space, space.tuples().into_iter().map(|t| (t, q(1, 4))))?;
    let point = JointDist::point_mass(vec![1, 1]);

    for rule in [ScoringRule::Log, ScoringRule::Quadratic, ScoringRule::shifted_quadratic()] {
        println!("{}", rule.name());
        for (name, r) in [("truth", &truth), ("flat", &flat), ("point", &point)] {
            let s = rule.expected_score(&truth, r)?;
            let gap = rule.properness_gap(&truth, r)?;
            println!("  report {name:<5} expected {:>10}  gap {:>10}", s.render(), gap.render());
        }
    }
    Ok(())
}
