//! Current-state, initial-state and infinite-step opacity verifiers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::json;

use crate::algebra::SolverConfig;
use crate::model::{EpEfa, Observation, ObservationSpec, StateSet};
use crate::observer::{build_observer_until, build_observer_with, ObserverLimits};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    CurrentState,
    InitialState,
    InfiniteStep,
}

impl FromStr for Property {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cso" | "current_state" | "current-state" => Ok(Property::CurrentState),
            "iso" | "initial_state" | "initial-state" => Ok(Property::InitialState),
            "inf" | "infinite_step" | "infinite-step" => Ok(Property::InfiniteStep),
            _ => Err(Error::InvalidQuery(format!("unknown property '{s}' (expected cso, iso or inf)"))),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::CurrentState => "current_state",
            Property::InitialState => "initial_state",
            Property::InfiniteStep => "infinite_step",
        })
    }
}

#[derive(Clone, Debug)]
pub struct OpacityQuery {
    pub property: Property,
    pub secret: StateSet,
    pub nonsecret: StateSet,
    pub theta: ObservationSpec,
}

impl OpacityQuery {
    pub fn new(property: Property, secret: StateSet, nonsecret: StateSet, theta: ObservationSpec) -> Self {
        OpacityQuery { property, secret, nonsecret, theta }
    }

    /// Resolves state names against `s`.
    pub fn named(s: &EpEfa, property: Property, secret: &[&str], nonsecret: &[&str], theta: ObservationSpec) -> Result<Self> {
        Ok(OpacityQuery::new(property, s.state_set(secret)?, s.state_set(nonsecret)?, theta))
    }

    pub fn validate(&self, s: &EpEfa) -> Result<()> {
        let n = s.states.len();
        if self.secret.iter().chain(&self.nonsecret).any(|&q| q >= n) {
            return Err(Error::InvalidQuery("state index out of range".into()));
        }
        if self.property == Property::InitialState && !(self.secret.is_subset(&s.initial) && self.nonsecret.is_subset(&s.initial)) {
            return Err(Error::InvalidQuery("initial-state opacity needs secret and non-secret states among the initial states".into()));
        }
        Ok(())
    }

    /// An estimate meets the secret set and misses the non-secret set.
    pub fn violated_by(&self, estimate: &StateSet) -> bool {
        !estimate.is_disjoint(&self.secret) && estimate.is_disjoint(&self.nonsecret)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Names of the violating estimate (for infinite-step, the forward one).
    pub state: Vec<String>,
    /// A forward-time observation reaching `state`.
    pub observation: Observation,
    /// Infinite-step only: the reverse estimate and the forward-time
    /// continuation whose reversal reaches it.
    pub continuation: Option<(Vec<String>, Observation)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub opaque: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn opaque() -> Self {
        Verdict { opaque: true, witness: None }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.witness {
            None => json!({ "opaque": self.opaque }),
            Some(w) => {
                let mut wit = json!({ "state": w.state, "observation": w.observation.to_json() });
                if let Some((rs, cont)) = &w.continuation {
                    wit["reverse_state"] = json!(rs);
                    wit["continuation"] = cont.to_json();
                }
                json!({ "opaque": self.opaque, "witness": wit })
            }
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.opaque {
            return f.write_str("opaque");
        }
        f.write_str("not opaque")?;
        if let Some(w) = &self.witness {
            write!(f, "\n  estimate: {{{}}}\n  observation: {}", w.state.join(","), w.observation)?;
            if let Some((rs, cont)) = &w.continuation {
                write!(f, "\n  reverse estimate: {{{}}}\n  continuation: {}", rs.join(","), cont)?;
            }
        }
        Ok(())
    }
}

fn current_state(s: &EpEfa, q: &OpacityQuery, cfg: &SolverConfig, limits: &ObserverLimits) -> Result<Verdict> {
    if q.secret.is_empty() {
        return Ok(Verdict::opaque());
    }
    let out = build_observer_until(s, &q.theta, cfg, limits, &|est| q.violated_by(est))?;
    Ok(match out.stopped_at {
        None => Verdict::opaque(),
        Some(i) => {
            let witness = Witness { state: out.observer.names(i), observation: out.observer.path_to(i), continuation: None };
            Verdict { opaque: false, witness: Some(witness) }
        }
    })
}

/// Opaque iff no reachable observer state meets `secret` while missing
/// `nonsecret`. Stops at the first violating state.
pub fn check_current_state(s: &EpEfa, q: &OpacityQuery, cfg: &SolverConfig) -> Result<Verdict> {
    check_current_state_with(s, q, cfg, &ObserverLimits::default())
}

pub fn check_current_state_with(s: &EpEfa, q: &OpacityQuery, cfg: &SolverConfig, limits: &ObserverLimits) -> Result<Verdict> {
    q.validate(s)?;
    current_state(s, q, cfg, limits)
}

/// Current-state opacity of the reverse model; the witness observation is
/// turned back into forward time.
pub fn check_initial_state(s: &EpEfa, q: &OpacityQuery, cfg: &SolverConfig) -> Result<Verdict> {
    check_initial_state_with(s, q, cfg, &ObserverLimits::default())
}

pub fn check_initial_state_with(s: &EpEfa, q: &OpacityQuery, cfg: &SolverConfig, limits: &ObserverLimits) -> Result<Verdict> {
    q.validate(s)?;
    let mut v = current_state(&s.reverse(), q, cfg, limits)?;
    if let Some(w) = &mut v.witness {
        w.observation = w.observation.reversed();
    }
    Ok(v)
}

/// Scans every pair of forward and reverse observer states.
pub fn check_infinite_step(s: &EpEfa, q: &OpacityQuery, cfg: &SolverConfig) -> Result<Verdict> {
    check_infinite_step_with(s, q, cfg, &ObserverLimits::default())
}

pub fn check_infinite_step_with(s: &EpEfa, q: &OpacityQuery, cfg: &SolverConfig, limits: &ObserverLimits) -> Result<Verdict> {
    q.validate(s)?;
    if q.secret.is_empty() {
        return Ok(Verdict::opaque());
    }
    let fwd = build_observer_with(s, &q.theta, cfg, limits)?;
    let rev = build_observer_with(&s.reverse(), &q.theta, cfg, limits)?;
    let m = rev.states.len();
    let hit = (0..fwd.states.len() * m).into_par_iter().find_first(|&p| {
        let both: StateSet = fwd.states[p / m].intersection(&rev.states[p % m]).copied().collect();
        q.violated_by(&both)
    });
    Ok(match hit {
        None => Verdict::opaque(),
        Some(p) => {
            let (i, j) = (p / m, p % m);
            Verdict {
                opaque: false,
                witness: Some(Witness {
                    state: fwd.names(i),
                    observation: fwd.path_to(i),
                    continuation: Some((rev.names(j), rev.path_to(j).reversed())),
                }),
            }
        }
    })
}

/// Dispatches on `q.property`.
pub fn check(s: &EpEfa, q: &OpacityQuery, cfg: &SolverConfig) -> Result<Verdict> {
    check_with(s, q, cfg, &ObserverLimits::default())
}

pub fn check_with(s: &EpEfa, q: &OpacityQuery, cfg: &SolverConfig, limits: &ObserverLimits) -> Result<Verdict> {
    match q.property {
        Property::CurrentState => check_current_state_with(s, q, cfg, limits),
        Property::InitialState => check_initial_state_with(s, q, cfg, limits),
        Property::InfiniteStep => check_infinite_step_with(s, q, cfg, limits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn theta() -> ObservationSpec {
        ObservationSpec::parse("(>= x1 5)").unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::enumerate(40)
    }

    fn query(s: &EpEfa, p: Property, sec: &[&str], ns: &[&str]) -> OpacityQuery {
        OpacityQuery::named(s, p, sec, ns, theta()).unwrap()
    }

    #[test]
    fn five_state_current_state_violation() {
        let s = fixtures::five_state();
        let q = query(&s, Property::CurrentState, &["q2"], &["q0", "q1", "q3", "q4"]);
        let v = check_current_state(&s, &q, &cfg()).unwrap();
        assert!(!v.opaque);
        let w = v.witness.as_ref().unwrap();
        assert_eq!(w.state, ["q2"]);
        assert_eq!(w.observation, Observation::scalar(&[&[5]]));
        assert_eq!(v.to_json().to_string(), r#"{"opaque":false,"witness":{"state":["q2"],"observation":[[5]]}}"#);
    }

    #[test]
    fn five_state_current_state_opaque() {
        let s = fixtures::five_state();
        let q = query(&s, Property::CurrentState, &["q3"], &["q4"]);
        assert!(check_current_state(&s, &q, &cfg()).unwrap().opaque);
        let empty = query(&s, Property::CurrentState, &[], &[]);
        assert!(check_current_state(&s, &empty, &cfg()).unwrap().opaque);
    }

    #[test]
    fn five_state_initial_state() {
        let s = fixtures::five_state_three_initial();
        let q = query(&s, Property::InitialState, &["q2"], &["q0", "q1"]);
        assert!(check_initial_state(&s, &q, &cfg()).unwrap().opaque);
        let q = query(&s, Property::InitialState, &["q2"], &[]);
        assert!(!check_initial_state(&s, &q, &cfg()).unwrap().opaque);
        let bad = query(&s, Property::InitialState, &["q3"], &[]);
        assert!(matches!(check_initial_state(&s, &bad, &cfg()), Err(Error::InvalidQuery(_))));
    }

    #[test]
    fn five_state_infinite_step() {
        let s = fixtures::five_state();
        let q = query(&s, Property::InfiniteStep, &["q3"], &["q4"]);
        assert!(check_infinite_step(&s, &q, &cfg()).unwrap().opaque);
        let q = query(&s, Property::InfiniteStep, &["q2"], &["q3"]);
        let v = check_infinite_step(&s, &q, &cfg()).unwrap();
        assert!(!v.opaque);
        assert!(v.witness.unwrap().continuation.is_some());
    }

    #[test]
    fn property_names() {
        assert_eq!("cso".parse::<Property>().unwrap(), Property::CurrentState);
        assert_eq!("infinite_step".parse::<Property>().unwrap(), Property::InfiniteStep);
        assert!("xyz".parse::<Property>().is_err());
    }
}
