//! Identifiability and the technical condition on a small hand-written model.
use signal_elicit::model::{check_technical_condition, is_source_identifiable, JointDist, ModelSpec, SignalSpace};
use signal_elicit::rational::q;

fn main() -> signal_elicit::Result<()> {
    let space = SignalSpace::uniform_labels(2, &["a", "b"])?;
    let agree = JointDist::new(&space, [(vec![0, 0], q(1, 2)), (vec![1, 1], q(1, 2))])?;
    let noisy = JointDist::new(&space, [(vec![0, 0], q(2, 5)), (vec![0, 1], q(1, 10)), (vec![1, 0], q(1, 10)), (vec![1, 1], q(2, 5))])?;

    let good = ModelSpec::new(space.clone(), vec!["calm".into(), "storm".into()], vec![vec![agree.clone()], vec![noisy.clone()]])?;
    println!("distinct sets: identifiable = {}", is_source_identifiable(&good).identifiable);
    println!("technical condition: {:?}", check_technical_condition(&good).map(|_| "holds"));

    // the same distribution is feasible under both values
    let bad = ModelSpec::new(space, vec!["calm".into(), "storm".into()], vec![vec![agree.clone()], vec![noisy, agree]])?;
    let r = is_source_identifiable(&bad);
    println!("shared distribution: identifiable = {}", r.identifiable);
    if let Some(w) = r.witness {
        println!("witness: {}", serde_json::to_string(&w.record(&bad)).unwrap());
    }
    Ok(())
}
