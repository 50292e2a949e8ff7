use num::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{distance_vector, render_point, squared_distance, LocationConfig, Point};
use crate::error::Result;
use crate::mechanism::round_rng;
use crate::rational::Q;

#[derive(Clone, Debug, Default, Serialize)]
pub struct LemmaReport {
    pub trials: usize,
    /// Pairs with identical distance vectors (all of them should be equal points).
    pub equal_vector_pairs: usize,
    /// Pairs where one vector dominates the other coordinate-wise.
    pub dominance_pairs: usize,
    pub injectivity_counterexamples: Vec<(String, String)>,
    pub dominance_counterexamples: Vec<(String, String)>,
    /// Trials where `Σμᵢ(‖pᵢ−y‖² − ‖pᵢ−x‖²) = −‖x−y‖²` failed (μ the coefficients of y).
    pub identity_failures: usize,
}

fn random_in_hull<R: Rng>(rng: &mut R, points: &[Point]) -> (Vec<Q>, Point) {
    let mut w: Vec<i64> = points.iter().map(|_| if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..=20) }).collect();
    if w.iter().all(|&v| v == 0) {
        w[0] = 1;
    }
    let total: i64 = w.iter().sum();
    let mu: Vec<Q> = w.iter().map(|&v| Q::new(v.into(), total.into())).collect();
    let dim = points[0].len();
    let x = (0..dim).map(|k| mu.iter().zip(points).map(|(m, p)| m * &p[k]).sum()).collect();
    (mu, x)
}

#[derive(Default)]
struct Tally {
    equal: usize,
    dominance: usize,
    inj: Vec<(String, String)>,
    dom: Vec<(String, String)>,
    identity: usize,
}

/// Samples `trials` in-hull point pairs (trial `k` seeded from `(seed, k)`) and checks injectivity of
/// the distance map and that dominance forces equality, exactly.
pub fn verify_distance_lemmas(cfg: &LocationConfig, trials: usize, seed: u64) -> Result<LemmaReport> {
    let pts = cfg.points();
    let tallies: Vec<Tally> = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<Tally> {
            let mut rng = round_rng(seed, k as u64);
            let (_, x) = random_in_hull(&mut rng, pts);
            let (mu, y) = if k % 10 == 0 { (None, x.clone()) } else {
                let (mu, y) = random_in_hull(&mut rng, pts);
                (Some(mu), y)
            };
            let vx = distance_vector(cfg, &x)?;
            let vy = distance_vector(cfg, &y)?;
            let mut t = Tally::default();
            if vx == vy {
                t.equal += 1;
                if x != y {
                    t.inj.push((render_point(&x), render_point(&y)));
                }
            }
            for (a, b, va, vb) in [(&x, &y, &vx, &vy), (&y, &x, &vy, &vx)] {
                if vb.dominates(va) {
                    t.dominance += 1;
                    if a != b {
                        t.dom.push((render_point(a), render_point(b)));
                    }
                }
            }
            if let Some(mu) = mu {
                let lhs: Q = mu
                    .iter()
                    .zip(pts)
                    .map(|(m, p)| m * (squared_distance(p, &y) - squared_distance(p, &x)))
                    .sum();
                if !(lhs + squared_distance(&x, &y)).is_zero() {
                    t.identity += 1;
                }
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = LemmaReport { trials, ..LemmaReport::default() };
    for t in tallies {
        r.equal_vector_pairs += t.equal;
        r.dominance_pairs += t.dominance;
        r.injectivity_counterexamples.extend(t.inj);
        r.dominance_counterexamples.extend(t.dom);
        r.identity_failures += t.identity;
    }
    Ok(r)
}
