//! Seeded random instance generators for distributions and model specs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{JointDist, ModelSpec, SignalDist, SignalSpace};
use crate::rational::Q;

/// Random distribution on a random nonempty subset of the space's tuples,
/// with integer weights in `1..=max_weight` normalized exactly.
pub fn random_dist<R: Rng + ?Sized>(rng: &mut R, space: &SignalSpace, max_weight: i64) -> JointDist {
    let mut tuples = space.tuples();
    tuples.shuffle(rng);
    let k = rng.gen_range(1..=tuples.len());
    weighted(rng, space.n(), &tuples[..k], max_weight)
}

/// Random distribution with every tuple of the space in its support.
pub fn random_full_support<R: Rng + ?Sized>(
    rng: &mut R,
    space: &SignalSpace,
    max_weight: i64,
) -> JointDist {
    weighted(rng, space.n(), &space.tuples(), max_weight)
}

fn weighted<R: Rng + ?Sized>(rng: &mut R, arity: usize, tuples: &[Vec<usize>], max_weight: i64) -> JointDist {
    let w: Vec<i64> = tuples.iter().map(|_| rng.gen_range(1..=max_weight)).collect();
    let total: i64 = w.iter().sum();
    JointDist::from_entries(
        arity,
        tuples.iter().zip(w).map(|(t, wi)| (t.clone(), Q::new(wi.into(), total.into()))),
    )
}

/// Random one-observer distribution over `0..size` with full support.
pub fn random_signal_dist<R: Rng + ?Sized>(rng: &mut R, size: usize, max_weight: i64) -> SignalDist {
    let w: Vec<i64> = (0..size).map(|_| rng.gen_range(1..=max_weight)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().enumerate().map(|(s, wi)| (s, Q::new(wi.into(), total.into()))).collect()
}

/// Shape of generated specs.
#[derive(Clone, Debug)]
pub struct SpecShape {
    pub observers: (usize, usize),
    pub signals: (usize, usize),
    pub values: (usize, usize),
    pub per_set: (usize, usize),
    /// Probability that a set reuses a distribution already placed in another set.
    pub share_prob: f64,
    pub full_support: bool,
}

impl Default for SpecShape {
    fn default() -> Self {
        SpecShape {
            observers: (2, 3),
            signals: (1, 4),
            values: (2, 4),
            per_set: (1, 3),
            share_prob: 0.3,
            full_support: false,
        }
    }
}

pub fn random_space<R: Rng + ?Sized>(rng: &mut R, shape: &SpecShape) -> SignalSpace {
    let n = rng.gen_range(shape.observers.0..=shape.observers.1);
    let labels = (0..n)
        .map(|_| {
            let k = rng.gen_range(shape.signals.0..=shape.signals.1);
            (0..k).map(|s| ((b'a' + s as u8) as char).to_string()).collect()
        })
        .collect();
    SignalSpace::new(labels).expect("generated space is valid")
}

pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, shape: &SpecShape) -> ModelSpec {
    let space = random_space(rng, shape);
    let k = rng.gen_range(shape.values.0..=shape.values.1);
    let mut placed: Vec<JointDist> = Vec::new();
    let mut lsets = Vec::with_capacity(k);
    for _ in 0..k {
        let m = rng.gen_range(shape.per_set.0..=shape.per_set.1);
        let mut set = Vec::with_capacity(m);
        for _ in 0..m {
            let d = if !placed.is_empty() && rng.gen_bool(shape.share_prob) {
                placed[rng.gen_range(0..placed.len())].clone()
            } else if shape.full_support {
                random_full_support(rng, &space, 9)
            } else {
                random_dist(rng, &space, 9)
            };
            set.push(d);
        }
        placed.extend(set.iter().cloned());
        lsets.push(set);
    }
    let values = (0..k).map(|x| format!("x{}", x + 1)).collect();
    ModelSpec::new(space, values, lsets).expect("generated spec is valid")
}
