//! TOML scenario files: one document describes a model, the mechanism's parameters and analysis options.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num::{One, Signed};
use serde::Deserialize;

use crate::bandwidth::{build_bandwidth_spec, BandwidthConfig, MenuKind};
use crate::error::{Error, Result};
use crate::location::{build_location_spec, LocationConfig};
use crate::mechanism::Setting;
use crate::model::{JointDist, ModelSpec, Prior, SignalSpace};
use crate::rational::{fmt_q, parse_q, Q};
use crate::scoring::ScoringRule;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: String,
    seed: Option<u64>,
    #[serde(default)]
    rounds: usize,
    #[serde(default = "default_rule")]
    rule: String,
    #[serde(default = "default_c")]
    c: String,
    prior: Option<BTreeMap<String, String>>,
    model: Option<RawModel>,
    location: Option<RawLocation>,
    bandwidth: Option<RawBandwidth>,
    #[serde(default)]
    analysis: RawAnalysis,
}

fn default_rule() -> String {
    "quadratic".into()
}

fn default_c() -> String {
    "1".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    observers: Vec<Vec<String>>,
    values: Vec<String>,
    lsets: BTreeMap<String, Vec<BTreeMap<String, String>>>,
    #[serde(default)]
    choice: BTreeMap<String, usize>,
    characteristics: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLocation {
    observers: Vec<Vec<String>>,
    candidates: Vec<Vec<String>>,
    eps: Option<Vec<String>>,
    #[serde(default = "default_trials")]
    lemma_trials: usize,
}

fn default_trials() -> usize {
    1000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBandwidth {
    grid: Vec<String>,
    throttles: Vec<String>,
    menus: Vec<String>,
    x: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    p0: Option<Vec<String>>,
    garbling: Option<String>,
    pool_signal: Option<usize>,
    coalition: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    Generic,
    Location,
    Bandwidth,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Generic => "generic",
            ScenarioKind::Location => "location",
            ScenarioKind::Bandwidth => "bandwidth",
        }
    }
}

/// Observer garbling used by the honesty and total-payoff analyses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Garbling {
    Pooling(usize),
    Uniform,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub p0: Vec<Q>,
    pub garbling: Garbling,
    pub coalition: BTreeSet<usize>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub rounds: usize,
    pub setting: Setting,
    pub c: Q,
    /// Truthful choice per value.
    pub choices: Vec<JointDist>,
    pub location: Option<LocationConfig>,
    pub eps: Option<Vec<Q>>,
    pub lemma_trials: usize,
    pub bandwidth: Option<BandwidthConfig>,
    /// Grid index examined by the quasi-strictness check, `None` for every value.
    pub bandwidth_x: Option<usize>,
    pub analysis: Analysis,
}

fn perr(path: &str, message: impl Into<String>) -> Error {
    Error::Parse { path: path.into(), message: message.into() }
}

fn rationals(path: &str, v: &[String]) -> Result<Vec<Q>> {
    v.iter()
        .enumerate()
        .map(|(k, s)| parse_q(s).map_err(|e| perr(&format!("{path}[{k}]"), e.to_string())))
        .collect()
}

fn parse_generic(m: RawModel) -> Result<(ModelSpec, Vec<JointDist>)> {
    let space = SignalSpace::new(m.observers)?;
    let mut lsets = Vec::new();
    for v in &m.values {
        let Some(raw) = m.lsets.get(v) else {
            return Err(perr(&format!("model.lsets.{v}"), "missing feasible set"));
        };
        let mut set = Vec::new();
        for (k, d) in raw.iter().enumerate() {
            let path = format!("model.lsets.{v}[{k}]");
            let mut entries = Vec::new();
            for (key, p) in d {
                let labels: Vec<&str> = key.split(',').map(str::trim).collect();
                if labels.len() != space.n() {
                    return Err(perr(&path, format!("tuple `{key}` needs {} labels", space.n())));
                }
                let t = labels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| space.index_of(i, l).ok_or_else(|| perr(&path, format!("unknown label `{l}` for observer {i}"))))
                    .collect::<Result<Vec<_>>>()?;
                let p = parse_q(p).map_err(|e| perr(&path, e.to_string()))?;
                entries.push((t, p));
            }
            set.push(JointDist::new(&space, entries).map_err(|e| perr(&path, e.to_string()))?);
        }
        lsets.push(set);
    }
    if let Some(extra) = m.lsets.keys().find(|k| !m.values.contains(k)) {
        return Err(perr(&format!("model.lsets.{extra}"), "not a declared value"));
    }
    let mut spec = ModelSpec::new(space, m.values.clone(), lsets)?;
    if let Some(c) = m.characteristics {
        spec = spec.with_characteristics(c)?;
    }
    let mut choices = Vec::new();
    for (x, v) in m.values.iter().enumerate() {
        let k = m.choice.get(v).copied().unwrap_or(0);
        let set = spec.lset(x);
        let d = set.get(k).ok_or_else(|| perr(&format!("model.choice.{v}"), format!("index {k} outside the feasible set")))?;
        choices.push(d.clone());
    }
    Ok((spec, choices))
}

fn points(path: &str, raw: &[Vec<String>]) -> Result<Vec<Vec<Q>>> {
    raw.iter().enumerate().map(|(k, p)| rationals(&format!("{path}[{k}]"), p)).collect()
}

pub fn parse_scenario_str(doc: &str, origin: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(doc).map_err(|e| perr(origin, e.to_string()))?;
    let seed = raw.seed.ok_or_else(|| perr("seed", "a seed is mandatory"))?;
    let rule: ScoringRule = raw.rule.parse().map_err(|e: Error| perr("rule", e.to_string()))?;
    let c = parse_q(&raw.c).map_err(|e| perr("c", e.to_string()))?;
    if !c.is_positive() || c > Q::one() {
        return Err(perr("c", format!("c = {} outside (0,1]: the rescaled pi range is (0,1]", fmt_q(&c))));
    }
    let kind = match raw.kind.as_str() {
        "generic" => ScenarioKind::Generic,
        "location" => ScenarioKind::Location,
        "bandwidth" => ScenarioKind::Bandwidth,
        other => return Err(perr("kind", format!("unknown kind `{other}`"))),
    };
    let present = [
        ("model", ScenarioKind::Generic, raw.model.is_some()),
        ("location", ScenarioKind::Location, raw.location.is_some()),
        ("bandwidth", ScenarioKind::Bandwidth, raw.bandwidth.is_some()),
    ];
    for (name, owner, is) in present {
        if is && owner != kind {
            return Err(perr(name, format!("section not allowed in a {} scenario", kind.name())));
        }
    }
    let mut location = None;
    let mut eps = None;
    let mut lemma_trials = default_trials();
    let mut bandwidth = None;
    let mut bandwidth_x = None;
    let (spec, choices) = match kind {
        ScenarioKind::Generic => parse_generic(raw.model.ok_or_else(|| perr("model", "missing section"))?)?,
        ScenarioKind::Location => {
            let l = raw.location.ok_or_else(|| perr("location", "missing section"))?;
            let cfg = LocationConfig::new(points("location.observers", &l.observers)?, points("location.candidates", &l.candidates)?)
                .map_err(|e| perr("location", e.to_string()))?;
            if let Some(e) = &l.eps {
                let e = rationals("location.eps", e)?;
                crate::location::build_noisy_location_spec(&cfg, &e).map_err(|err| perr("location.eps", err.to_string()))?;
                eps = Some(e);
            }
            lemma_trials = l.lemma_trials;
            let spec = build_location_spec(&cfg)?;
            location = Some(cfg);
            // own distance vector: every candidate dominates itself, listed in candidate order
            let choices = (0..spec.values().len()).map(|x| own_vector(&spec, x)).collect();
            (spec, choices)
        }
        ScenarioKind::Bandwidth => {
            let b = raw.bandwidth.ok_or_else(|| perr("bandwidth", "missing section"))?;
            let grid = rationals("bandwidth.grid", &b.grid)?;
            let throttles = b
                .throttles
                .iter()
                .enumerate()
                .map(|(k, t)| if t == "inf" { Ok(None) } else { parse_q(t).map(Some).map_err(|e| perr(&format!("bandwidth.throttles[{k}]"), e.to_string())) })
                .collect::<Result<Vec<_>>>()?;
            let menus = b
                .menus
                .iter()
                .enumerate()
                .map(|(k, m)| m.parse::<MenuKind>().map_err(|e| perr(&format!("bandwidth.menus[{k}]"), e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let cfg = BandwidthConfig::new(grid, throttles, menus).map_err(|e| perr("bandwidth", e.to_string()))?;
            if let Some(x) = &b.x {
                let v = parse_q(x).map_err(|e| perr("bandwidth.x", e.to_string()))?;
                bandwidth_x = Some(cfg.grid().iter().position(|g| g == &v).ok_or_else(|| perr("bandwidth.x", "not a grid value"))?);
            }
            let spec = build_bandwidth_spec(&cfg)?;
            let choices = spec.lsets().iter().map(|l| l[0].clone()).collect();
            bandwidth = Some(cfg);
            (spec, choices)
        }
    };
    let prior = match raw.prior {
        None => Prior::uniform(spec.values().len()),
        Some(map) => {
            if let Some(k) = map.keys().find(|k| spec.value_index(k).is_none()) {
                return Err(perr(&format!("prior.{k}"), "not a source value"));
            }
            let probs = spec
                .values()
                .iter()
                .map(|v| map.get(v).map_or(Ok(Q::from_integer(0.into())), |p| parse_q(p).map_err(|e| perr(&format!("prior.{v}"), e.to_string()))))
                .collect::<Result<Vec<_>>>()?;
            Prior::new(probs).map_err(|e| perr("prior", e.to_string()))?
        }
    };
    let n = spec.n();
    let analysis = {
        let a = raw.analysis;
        let p0 = match &a.p0 {
            Some(v) => rationals("analysis.p0", v)?,
            None => vec![Q::new(1.into(), 100.into()), Q::new(1.into(), 10.into()), Q::new(1.into(), 2.into())],
        };
        if let Some(p) = p0.iter().find(|p| p.is_negative() || *p > &Q::one()) {
            return Err(perr("analysis.p0", format!("{} outside [0,1]", fmt_q(p))));
        }
        let garbling = match a.garbling.as_deref().unwrap_or("pooling") {
            "pooling" => Garbling::Pooling(a.pool_signal.unwrap_or(0)),
            "uniform" => Garbling::Uniform,
            other => return Err(perr("analysis.garbling", format!("unknown garbling `{other}`"))),
        };
        if let Garbling::Pooling(k) = garbling {
            if (0..n).any(|i| k >= spec.space().size(i)) {
                return Err(perr("analysis.pool_signal", "signal index outside some observer's signal set"));
            }
        }
        let coalition: BTreeSet<usize> = a.coalition.unwrap_or_default().into_iter().collect();
        if let Some(i) = coalition.iter().find(|&&i| i >= n) {
            return Err(perr("analysis.coalition", format!("observer {i} out of range for {n} observers")));
        }
        Analysis { p0, garbling, coalition }
    };
    let setting = Setting::new(spec, prior, rule)?;
    Ok(Scenario {
        kind,
        seed,
        rounds: raw.rounds,
        setting,
        c,
        choices,
        location,
        eps,
        lemma_trials,
        bandwidth,
        bandwidth_x,
        analysis,
    })
}

fn own_vector(spec: &ModelSpec, x: usize) -> JointDist {
    // The value's own vector is the one dominated by every other member of its set.
    let set = spec.lset(x);
    let space = spec.space();
    let key = |d: &JointDist| -> Vec<Q> {
        let t = d.support().next().expect("point mass");
        t.iter().enumerate().map(|(i, &k)| parse_q(space.label(i, k)).expect("numeric label")).collect()
    };
    set.iter()
        .min_by(|a, b| key(a).iter().zip(key(b).iter()).map(|(p, q)| p.cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty")
        .clone()
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let doc = std::fs::read_to_string(path).map_err(|e| perr(&path.display().to_string(), e.to_string()))?;
    parse_scenario_str(&doc, &path.display().to_string())
}
