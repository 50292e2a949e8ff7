//! Bandwidth estimation: throttling makes caps indistinguishable, and upward claims still lose.
use signal_elicit::bandwidth::{demonstrate_non_identifiability, quasi_strictness_check, BandwidthConfig, MenuKind};
use signal_elicit::rational::qi;
use signal_elicit::scoring::ScoringRule;

fn main() -> signal_elicit::Result<()> {
    let grid = vec![qi(1), qi(2), qi(3)];
    let open = BandwidthConfig::new(grid.clone(), vec![None, None], vec![MenuKind::AtCap, MenuKind::AtCap])?;
    println!("unthrottled witness: {:?}", demonstrate_non_identifiability(&open, ScoringRule::Quadratic)?.map(|w| (w.x1, w.x2)));

    let throttled = BandwidthConfig::new(grid, vec![Some(qi(1)), Some(qi(1))], vec![MenuKind::AtCap, MenuKind::TwoPoint])?;
    if let Some(w) = demonstrate_non_identifiability(&throttled, ScoringRule::Quadratic)? {
        println!("throttled witness: {} looks like {} (tie {})", w.x2, w.x1, w.tie.score_tie);
    }
    for x in 0..3 {
        let r = quasi_strictness_check(&throttled, ScoringRule::Quadratic, x)?;
        println!("cap {}: quasi-strict={} upward rows={}", r.x, r.quasi_strict, r.upward.len());
        for row in &r.upward {
            println!("  claim {} held gap {} min gap {}", row.xhat, row.held_gap.render(), row.min_gap.render());
        }
    }
    Ok(())
}
