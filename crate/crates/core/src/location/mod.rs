//! Observers at known points learning (possibly enlarged) Euclidean distances to the source.

mod hull;
mod lemmas;
mod surd;

pub use hull::{hull_contains, phase_one, Feasibility, HullCertificate, HullMembership};
pub use lemmas::{verify_distance_lemmas, LemmaReport};
pub use surd::Surd;

use std::collections::{BTreeMap, BTreeSet};

use num::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{coalition_refinement, is_source_identifiable, JointDist, ModelSpec, SignalSpace, WitnessRecord};
use crate::rational::{fmt_q, q, to_f64, Q};
use hull::{dot, inner_diff};

pub type Point = Vec<Q>;

#[derive(Clone, Debug, PartialEq)]
pub struct LocationConfig {
    dim: usize,
    points: Vec<Point>,
    candidates: Vec<Point>,
}

fn distinct(v: &[Point]) -> bool {
    v.iter().collect::<BTreeSet<_>>().len() == v.len()
}

pub fn render_point(p: &[Q]) -> String {
    format!("({})", p.iter().map(fmt_q).collect::<Vec<_>>().join(","))
}

impl LocationConfig {
    pub fn new(points: Vec<Point>, candidates: Vec<Point>) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        if dim == 0 {
            return Err(Error::InvalidConfig("observer points must have positive dimension".into()));
        }
        if let Some(p) = points.iter().chain(&candidates).find(|p| p.len() != dim) {
            return Err(Error::Dimension { expected: dim, got: p.len() });
        }
        if points.len() < 2 {
            return Err(Error::InvalidConfig("at least two observers are required".into()));
        }
        if candidates.len() < 2 {
            return Err(Error::InvalidConfig("at least two candidate source points are required".into()));
        }
        if !distinct(&points) || !distinct(&candidates) {
            return Err(Error::InvalidConfig("points must be pairwise distinct".into()));
        }
        Ok(LocationConfig { dim, points, candidates })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn candidates(&self) -> &[Point] {
        &self.candidates
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }
}

/// Exact squared distances from every observer to a point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DistanceVector {
    pub squared: Vec<Q>,
}

impl DistanceVector {
    pub fn distances(&self) -> Vec<f64> {
        self.squared.iter().map(|s| to_f64(s).sqrt()).collect()
    }

    /// Coordinate-wise `self ≥ other` on the given observers.
    pub fn dominates_on(&self, other: &DistanceVector, keep: &[usize]) -> bool {
        keep.iter().all(|&i| self.squared[i] >= other.squared[i])
    }

    pub fn dominates(&self, other: &DistanceVector) -> bool {
        self.squared.iter().zip(&other.squared).all(|(a, b)| a >= b)
    }
}

pub fn squared_distance(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance_vector(cfg: &LocationConfig, x: &[Q]) -> Result<DistanceVector> {
    if x.len() != cfg.dim {
        return Err(Error::Dimension { expected: cfg.dim, got: x.len() });
    }
    Ok(DistanceVector { squared: cfg.points.iter().map(|p| squared_distance(p, x)).collect() })
}

fn vectors(cfg: &LocationConfig) -> Vec<DistanceVector> {
    cfg.candidates.iter().map(|x| distance_vector(cfg, x).expect("validated dimension")).collect()
}

/// Shared packaging: per-observer labels from the signal values that occur, values from `X`.
fn assemble<T: Ord + Clone + ToString>(
    cfg: &LocationConfig,
    sets: Vec<Vec<Vec<(Vec<T>, Q)>>>,
) -> Result<ModelSpec> {
    let n = cfg.n();
    let mut labels: Vec<BTreeSet<T>> = vec![BTreeSet::new(); n];
    for set in &sets {
        for d in set {
            for (t, _) in d {
                for (i, s) in t.iter().enumerate() {
                    labels[i].insert(s.clone());
                }
            }
        }
    }
    let index: Vec<BTreeMap<T, usize>> =
        labels.iter().map(|l| l.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect()).collect();
    let space = SignalSpace::new(labels.iter().map(|l| l.iter().map(|s| s.to_string()).collect()).collect())?;
    let lsets = sets
        .into_iter()
        .map(|set| {
            set.into_iter()
                .map(|d| {
                    JointDist::new(
                        &space,
                        d.into_iter().map(|(t, p)| (t.iter().enumerate().map(|(i, s)| index[i][s]).collect(), p)),
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let values = cfg.candidates.iter().map(|x| render_point(x)).collect();
    ModelSpec::new(space, values, lsets)?.with_characteristics(cfg.points.iter().map(|p| render_point(p)).collect())
}

/// Dominating candidates of each `x` on the observers in `keep`.
fn dominance_sets(cfg: &LocationConfig, keep: &[usize]) -> Vec<Vec<usize>> {
    let v = vectors(cfg);
    (0..v.len())
        .map(|x| (0..v.len()).filter(|&x2| v[x2].dominates_on(&v[x], keep)).collect())
        .collect()
}

/// Signal labels are exact squared distances.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct SqLabel(Q);

impl std::fmt::Display for SqLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&fmt_q(&self.0))
    }
}

/// `L_x` = point masses on the distance vectors of candidates dominating `x`.
pub fn build_location_spec(cfg: &LocationConfig) -> Result<ModelSpec> {
    let all: Vec<usize> = (0..cfg.n()).collect();
    point_mass_spec(cfg, &dominance_sets(cfg, &all))
}

fn point_mass_spec(cfg: &LocationConfig, dom: &[Vec<usize>]) -> Result<ModelSpec> {
    let v = vectors(cfg);
    let sets = dom
        .iter()
        .map(|xs| {
            xs.iter()
                .map(|&x2| vec![(v[x2].squared.iter().cloned().map(SqLabel).collect(), q(1, 1))])
                .collect()
        })
        .collect();
    assemble(cfg, sets)
}

/// Like [`build_location_spec`] with the two-point `±ε` mixture on actual distances.
/// Signal labels are exact surds `√s ± εᵢ`.
pub fn build_noisy_location_spec(cfg: &LocationConfig, eps: &[Q]) -> Result<ModelSpec> {
    if eps.len() != cfg.n() {
        return Err(Error::Dimension { expected: cfg.n(), got: eps.len() });
    }
    if eps.iter().any(|e| !e.is_positive()) {
        return Err(Error::InvalidConfig("noise offsets must be positive".into()));
    }
    let v = vectors(cfg);
    let all: Vec<usize> = (0..cfg.n()).collect();
    let dom = dominance_sets(cfg, &all);
    let mut sets = Vec::new();
    for xs in &dom {
        let mut set = Vec::new();
        for &x2 in xs {
            let up: Vec<Surd> = v[x2].squared.iter().zip(eps).map(|(s, e)| Surd::sqrt_plus(s, e)).collect();
            let down: Vec<Surd> = v[x2].squared.iter().zip(eps).map(|(s, e)| Surd::sqrt_plus(s, &-e.clone())).collect();
            if let Some(i) = down.iter().position(|s| s.is_negative()) {
                return Err(Error::InvalidConfig(format!(
                    "offset {} exceeds the distance of observer {i} to {}",
                    fmt_q(&eps[i]),
                    render_point(&cfg.candidates[x2])
                )));
            }
            set.push(vec![(up, q(1, 2)), (down, q(1, 2))]);
        }
        sets.push(set);
    }
    assemble(cfg, sets)
}

/// Spec seen by the observers outside `coalition` when the coalition reports freely with the source:
/// `L_x` keeps every candidate dominating `x` on the remaining observers only.
pub fn build_collusion_spec(cfg: &LocationConfig, coalition: &BTreeSet<usize>) -> Result<ModelSpec> {
    if let Some(&i) = coalition.iter().find(|&&i| i >= cfg.n()) {
        return Err(Error::ObserverOutOfRange { index: i, n: cfg.n() });
    }
    let keep: Vec<usize> = (0..cfg.n()).filter(|i| !coalition.contains(i)).collect();
    let aware = point_mass_spec(cfg, &dominance_sets(cfg, &keep))?;
    coalition_refinement(&aware, coalition)
}

#[derive(Clone, Debug, Serialize)]
pub struct LocationCollusionReport {
    pub coalition: Vec<usize>,
    pub remaining: Vec<usize>,
    pub remaining_hull_contains_x: bool,
    pub identifiable_before: bool,
    pub identifiable_after: bool,
    pub witness: Option<WitnessRecord>,
}

pub fn location_collusion(cfg: &LocationConfig, coalition: &BTreeSet<usize>) -> Result<LocationCollusionReport> {
    let base = build_location_spec(cfg)?;
    let refined = build_collusion_spec(cfg, coalition)?;
    let remaining: Vec<usize> = (0..cfg.n()).filter(|i| !coalition.contains(i)).collect();
    let rest: Vec<Point> = remaining.iter().map(|&i| cfg.points[i].clone()).collect();
    let mut contains = true;
    for x in &cfg.candidates {
        contains &= hull_contains(&rest, x)?.inside;
    }
    let rep = is_source_identifiable(&refined);
    Ok(LocationCollusionReport {
        coalition: coalition.iter().copied().collect(),
        remaining,
        remaining_hull_contains_x: contains,
        identifiable_before: base.is_identifiable(),
        identifiable_after: rep.identifiable,
        witness: rep.witness.map(|w| w.record(&refined)),
    })
}

/// Two outside candidates on a common ray leaving the hull, with the inequality terms per observer.
#[derive(Clone, Debug, PartialEq)]
pub struct ReverseWitness {
    pub x1: usize,
    pub x2: usize,
    pub origin: Point,
    pub u: Point,
    pub alpha: Q,
    pub beta: Q,
    pub terms: Vec<Q>,
}

/// `(β−α)((β+α)‖u‖² + 2⟨pᵢ−o, u⟩)` per observer: the squared-distance increase from `o − αu` to `o − βu`.
pub fn reverse_inequality_terms(points: &[Point], origin: &[Q], u: &[Q], alpha: &Q, beta: &Q) -> Vec<Q> {
    let uu = dot(u, u);
    points
        .iter()
        .map(|p| (beta - alpha) * ((beta + alpha) * &uu + Q::from_integer(2.into()) * inner_diff(p, origin, u)))
        .collect()
}

/// First ordered pair `(x1, x2)` with `u = x1 − x2` and the hull strictly on the `+u` side of `x1`.
pub fn find_reverse_witness(cfg: &LocationConfig) -> Option<ReverseWitness> {
    let xs = &cfg.candidates;
    for a in 0..xs.len() {
        for b in 0..xs.len() {
            if a == b {
                continue;
            }
            let u: Point = xs[a].iter().zip(&xs[b]).map(|(p, r)| p - r).collect();
            let margins: Vec<Q> = cfg.points.iter().map(|p| inner_diff(p, &xs[a], &u)).collect();
            let Some(min) = margins.iter().min().cloned() else { continue };
            if !min.is_positive() {
                continue;
            }
            let uu = dot(&u, &u);
            let alpha = &min / &uu;
            let beta = &alpha + Q::from_integer(1.into());
            let origin: Point = xs[a].iter().zip(&u).map(|(x, c)| x + &alpha * c).collect();
            let terms = reverse_inequality_terms(&cfg.points, &origin, &u, &alpha, &beta);
            return Some(ReverseWitness { x1: a, x2: b, origin, u, alpha, beta, terms });
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HullVerdict {
    /// Every candidate inside the hull and the spec is identifiable.
    ForwardHolds,
    ForwardFails,
    /// The two-point construction applies and the spec is non-identifiable.
    ReverseHolds,
    ReverseFails,
    /// Some candidate outside the hull but the construction does not apply.
    NoVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateHull {
    pub x: String,
    pub inside: bool,
    pub certificate: HullCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReverseRecord {
    pub x1: String,
    pub x2: String,
    pub origin: String,
    pub u: String,
    pub alpha: String,
    pub beta: String,
    pub terms: Vec<String>,
    pub all_positive: bool,
    pub shared_vector_in_both_sets: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HullReport {
    pub candidates: Vec<CandidateHull>,
    pub identifiable: bool,
    pub witness: Option<WitnessRecord>,
    pub reverse: Option<ReverseRecord>,
    pub verdict: HullVerdict,
}

pub fn check_hull_characterization(cfg: &LocationConfig) -> Result<HullReport> {
    let mut candidates = Vec::new();
    let mut all_inside = true;
    for x in &cfg.candidates {
        let m = hull_contains(&cfg.points, x)?;
        all_inside &= m.inside;
        candidates.push(CandidateHull { x: render_point(x), inside: m.inside, certificate: m.certificate(&cfg.points, x) });
    }
    let spec = build_location_spec(cfg)?;
    let rep = is_source_identifiable(&spec);
    let witness = rep.witness.map(|w| w.record(&spec));
    let mut reverse = None;
    let verdict = if all_inside {
        if rep.identifiable { HullVerdict::ForwardHolds } else { HullVerdict::ForwardFails }
    } else if let Some(w) = find_reverse_witness(cfg) {
        let v = vectors(cfg);
        let all_positive = w.terms.iter().all(|t| t.is_positive());
        // x2's vector is feasible at x2 and, dominating x1's, at x1.
        let shared = v[w.x2].dominates(&v[w.x1]);
        reverse = Some(ReverseRecord {
            x1: render_point(&cfg.candidates[w.x1]),
            x2: render_point(&cfg.candidates[w.x2]),
            origin: render_point(&w.origin),
            u: render_point(&w.u),
            alpha: fmt_q(&w.alpha),
            beta: fmt_q(&w.beta),
            terms: w.terms.iter().map(fmt_q).collect(),
            all_positive,
            shared_vector_in_both_sets: shared && spec.lset(w.x1).iter().any(|d| spec.lset(w.x2).contains(d)),
        });
        if !rep.identifiable && all_positive { HullVerdict::ReverseHolds } else { HullVerdict::ReverseFails }
    } else {
        HullVerdict::NoVerdict
    };
    Ok(HullReport { candidates, identifiable: rep.identifiable, witness, reverse, verdict })
}


#[cfg(test)]
mod tests;
