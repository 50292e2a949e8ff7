//! Command dispatch and report emission for the `signal-elicit` binary.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bandwidth::{demonstrate_non_identifiability, quasi_strictness_check};
use crate::equilibrium::{
    check_equilibrium, collusion_analysis, honesty_injection, impossibility_witness, overall_verdict,
    total_payoff_comparison, truthful_profile_with, HonestyVerdict, Verdict,
};
use crate::error::{Error, Result};
use crate::location::{build_noisy_location_spec, check_hull_characterization, location_collusion, verify_distance_lemmas, HullVerdict};
use crate::mechanism::{round_rng, run_round, RoundRecord};
use crate::model::{check_technical_condition, is_source_identifiable};
use crate::rational::fmt_q;
use crate::scenario::{Garbling, Scenario, ScenarioKind};
use crate::strategy::{ObserverStrategy, StrategyProfile, XRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    CheckIdentifiability,
    CheckTechnicalCondition,
    CheckEquilibrium,
    ImpossibilityWitness,
    HonestyInjection,
    Collusion,
    LocationCharacterization,
    LocationLemmas,
    BandwidthQuasistrict,
    TotalPayoff,
}

pub const COMMANDS: [&str; 11] = [
    "simulate",
    "check-identifiability",
    "check-technical-condition",
    "check-equilibrium",
    "impossibility-witness",
    "honesty-injection",
    "collusion",
    "location-characterization",
    "location-lemmas",
    "bandwidth-quasistrict",
    "total-payoff",
];

impl Command {
    pub fn name(self) -> &'static str {
        COMMANDS[self as usize]
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use Command::*;
        let all = [
            Simulate,
            CheckIdentifiability,
            CheckTechnicalCondition,
            CheckEquilibrium,
            ImpossibilityWitness,
            HonestyInjection,
            Collusion,
            LocationCharacterization,
            LocationLemmas,
            BandwidthQuasistrict,
            TotalPayoff,
        ];
        all.into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown command `{s}`")))
    }
}

/// Whether the command's verdict was affirmative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Affirmative,
    Negative,
}

impl Outcome {
    fn from(ok: bool) -> Self {
        if ok {
            Outcome::Affirmative
        } else {
            Outcome::Negative
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Affirmative => 0,
            Outcome::Negative => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub kind: String,
    pub seed: u64,
    pub version: String,
    pub wall_time_ms: u64,
    pub result: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn mismatch(cmd: Command, sc: &Scenario) -> Error {
    Error::CommandMismatch { command: cmd.name().into(), kind: sc.kind.name().into() }
}

/// Truthful profile for the scenario; non-identifiable specs fall back to first-match (generic) or
/// max-support (bandwidth) value reports.
pub fn scenario_profile(sc: &Scenario) -> Result<StrategyProfile> {
    let spec = &sc.setting.spec;
    let rule = match sc.kind {
        ScenarioKind::Bandwidth => XRule::MaxSupport,
        _ if spec.is_identifiable() => XRule::Lookup,
        _ => XRule::FirstMatch,
    };
    truthful_profile_with(spec, &sc.choices, sc.c.clone(), rule)
}

fn garbled_profile(sc: &Scenario, base: &StrategyProfile) -> StrategyProfile {
    let space = sc.setting.spec.space();
    let mut p = base.clone();
    for i in 0..sc.setting.n() {
        let s = match sc.analysis.garbling {
            Garbling::Pooling(k) => ObserverStrategy::pooling(k),
            Garbling::Uniform => ObserverStrategy::uniform_garbling(space.size(i)),
        };
        p = p.with_observer(i, ObserverStrategy { x: base.observers[i].x.clone(), ..s });
    }
    p
}

#[derive(Serialize)]
struct SimulationSummary {
    rounds: usize,
    mean_source: Option<f64>,
    mean_observers: Vec<f64>,
    records: Vec<RoundRecord>,
}

fn simulate(sc: &Scenario, rounds: usize) -> Result<Value> {
    let profile = scenario_profile(sc)?;
    let outcomes = (0..rounds)
        .into_par_iter()
        .map(|k| {
            let mut rng = round_rng(sc.seed, k as u64);
            run_round(&sc.setting, &profile, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = sc.setting.n();
    let mean = |f: &dyn Fn(&crate::mechanism::RoundOutcome) -> f64| -> f64 {
        outcomes.iter().map(f).sum::<f64>() / rounds as f64
    };
    let summary = SimulationSummary {
        rounds,
        mean_source: (rounds > 0).then(|| mean(&|o| o.payoffs.source.to_f64())),
        mean_observers: if rounds > 0 { (0..n).map(|i| mean(&|o| o.payoffs.observers[i].to_f64())).collect() } else { vec![] },
        records: outcomes.iter().map(|o| o.record(&sc.setting.spec)).collect(),
    };
    Ok(to_value(&summary))
}

/// Runs one command. `rounds` overrides the scenario's round count for `simulate`.
pub fn dispatch(cmd: Command, sc: &Scenario, rounds: Option<usize>) -> Result<(RunReport, Outcome)> {
    let start = Instant::now();
    let spec = &sc.setting.spec;
    let (result, outcome) = match cmd {
        Command::Simulate => (simulate(sc, rounds.unwrap_or(sc.rounds))?, Outcome::Affirmative),
        Command::CheckIdentifiability => {
            let r = is_source_identifiable(spec);
            let mut v = json!({
                "identifiable": r.identifiable,
                "witness": r.witness.as_ref().map(|w| to_value(&w.record(spec))),
            });
            if let (Some(cfg), Some(eps)) = (&sc.location, &sc.eps) {
                let noisy = build_noisy_location_spec(cfg, eps)?;
                let nr = is_source_identifiable(&noisy);
                v["noisy"] = json!({
                    "eps": eps.iter().map(fmt_q).collect::<Vec<_>>(),
                    "identifiable": nr.identifiable,
                    "witness": nr.witness.as_ref().map(|w| to_value(&w.record(&noisy))),
                });
            }
            (v, Outcome::from(r.identifiable))
        }
        Command::CheckTechnicalCondition => match check_technical_condition(spec) {
            Ok(()) => (json!({ "holds": true }), Outcome::Affirmative),
            Err(v) => (json!({ "holds": false, "violation": to_value(&v) }), Outcome::Negative),
        },
        Command::CheckEquilibrium => {
            if sc.kind == ScenarioKind::Bandwidth {
                return Err(mismatch(cmd, sc));
            }
            let profile = scenario_profile(sc)?;
            let reports = check_equilibrium(&sc.setting, &profile, sc.seed)?;
            let verdict = overall_verdict(&reports);
            (json!({ "verdict": to_value(&verdict), "players": to_value(&reports) }), Outcome::from(verdict == Verdict::Strict))
        }
        Command::ImpossibilityWitness => {
            if let Some(cfg) = &sc.bandwidth {
                let w = demonstrate_non_identifiability(cfg, sc.setting.rule.clone())?;
                let ok = w.is_some();
                (json!({ "witness": w.map(|w| to_value(&w)) }), Outcome::from(ok))
            } else {
                let w = impossibility_witness(&sc.setting)?;
                let ok = w.is_some();
                (json!({ "witness": w.map(|w| to_value(&w)) }), Outcome::from(ok))
            }
        }
        Command::HonestyInjection => {
            if sc.kind == ScenarioKind::Bandwidth {
                return Err(mismatch(cmd, sc));
            }
            let truthful = scenario_profile(sc)?;
            let garbled = garbled_profile(sc, &truthful);
            let mut rows = Vec::new();
            let mut ok = true;
            for p0 in &sc.analysis.p0 {
                let g = honesty_injection(&sc.setting, &garbled, p0)?;
                let t = honesty_injection(&sc.setting, &truthful, p0)?;
                if !num::Zero::is_zero(p0) {
                    ok &= g.verdict == HonestyVerdict::Refuted;
                }
                ok &= t.verdict == HonestyVerdict::Survives;
                rows.push(json!({ "p0": fmt_q(p0), "garbled": to_value(&g), "truthful": to_value(&t) }));
            }
            (json!({ "garbled_profile": garbled.observers[0].describe(), "rows": rows }), Outcome::from(ok))
        }
        Command::Collusion => {
            let r = match &sc.location {
                Some(cfg) => to_value(&location_collusion(cfg, &sc.analysis.coalition)?),
                None => to_value(&collusion_analysis(spec, &sc.analysis.coalition)?),
            };
            let ok = r["identifiable_after"].as_bool().unwrap_or(false);
            (r, Outcome::from(ok))
        }
        Command::LocationCharacterization => {
            let cfg = sc.location.as_ref().ok_or_else(|| mismatch(cmd, sc))?;
            let r = check_hull_characterization(cfg)?;
            let ok = !matches!(r.verdict, HullVerdict::ForwardFails | HullVerdict::ReverseFails);
            (to_value(&r), Outcome::from(ok))
        }
        Command::LocationLemmas => {
            let cfg = sc.location.as_ref().ok_or_else(|| mismatch(cmd, sc))?;
            let r = verify_distance_lemmas(cfg, sc.lemma_trials, sc.seed)?;
            let ok = r.injectivity_counterexamples.is_empty() && r.dominance_counterexamples.is_empty() && r.identity_failures == 0;
            (to_value(&r), Outcome::from(ok))
        }
        Command::BandwidthQuasistrict => {
            let cfg = sc.bandwidth.as_ref().ok_or_else(|| mismatch(cmd, sc))?;
            let xs: Vec<usize> = match sc.bandwidth_x {
                Some(x) => vec![x],
                None => (0..cfg.grid().len()).collect(),
            };
            let reports = xs
                .into_par_iter()
                .map(|x| quasi_strictness_check(cfg, sc.setting.rule.clone(), x))
                .collect::<Result<Vec<_>>>()?;
            let ok = reports.iter().all(|r| r.quasi_strict);
            (json!({ "quasi_strict": ok, "values": to_value(&reports) }), Outcome::from(ok))
        }
        Command::TotalPayoff => {
            if sc.kind == ScenarioKind::Bandwidth {
                return Err(mismatch(cmd, sc));
            }
            let truthful = scenario_profile(sc)?;
            let garbled = garbled_profile(sc, &truthful);
            let r = total_payoff_comparison(&sc.setting, &truthful, &garbled)?;
            let ok = r.witness_c.is_some();
            (to_value(&r), Outcome::from(ok))
        }
    };
    let report = RunReport {
        command: cmd.name().into(),
        kind: sc.kind.name().into(),
        seed: sc.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_ms: start.elapsed().as_millis() as u64,
        result,
    };
    Ok((report, outcome))
}

/// Pretty JSON, the machine-readable form.
pub fn render_json(r: &RunReport) -> String {
    serde_json::to_string_pretty(r).expect("reports serialize") + "\n"
}

/// Flattened `path  value` lines rendered from the same record.
pub fn render_table(r: &RunReport) -> String {
    let mut out = String::new();
    let v = to_value(r);
    flatten("", &v, &mut out);
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, x, out);
            }
        }
        Value::Array(a) => {
            for (k, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{k}]"), x, out);
            }
        }
        Value::String(s) => {
            let _ = writeln!(out, "{prefix:<60} {s}");
        }
        other => {
            let _ = writeln!(out, "{prefix:<60} {other}");
        }
    }
}

