//! Location verification: candidates inside the observers' hull are identifiable,
//! and a colluding vertex observer can break that.
use std::collections::BTreeSet;

use signal_elicit::location::{check_hull_characterization, location_collusion, LocationConfig, Point};
use signal_elicit::rational::{q, qi};

fn main() -> signal_elicit::Result<()> {
    let p = |a: i64, b: i64| -> Point { vec![qi(a), qi(b)] };
    let observers = vec![p(0, 0), p(4, 0), p(0, 4)];
    let inside = LocationConfig::new(observers.clone(), vec![p(1, 1), p(2, 2), p(1, 2), vec![q(3, 2), q(1, 2)]])?;
    let r = check_hull_characterization(&inside)?;
    println!("inside hull: identifiable={} verdict={:?}", r.identifiable, r.verdict);

    let outside = LocationConfig::new(observers.clone(), vec![p(-1, -1), p(-2, -2)])?;
    let r = check_hull_characterization(&outside)?;
    println!("outside hull: identifiable={} verdict={:?}", r.identifiable, r.verdict);
    if let Some(w) = r.reverse {
        println!("  {}", serde_json::to_string(&w).unwrap());
    }

    for coalition in [BTreeSet::new(), BTreeSet::from([0])] {
        let r = location_collusion(&inside, &coalition)?;
        println!("coalition {coalition:?}: identifiable after = {}", r.identifiable_after);
    }
    Ok(())
}
