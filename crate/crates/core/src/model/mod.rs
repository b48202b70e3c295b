//! Event-parameter EFAs: symbolic transitions with a step length and a guard
//! over that many event parameters, and no state parameters.

mod json;
pub(crate) mod language;
mod strings;

pub use json::{ModelDoc, TransitionDoc};
pub use language::{ConcreteMoves, FlatLanguages, Run, DEFAULT_RUN_CAP};
pub use strings::{DataString, Elem, Event, Observation, ObservationSpec, Unit};

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{parse_predicate, reverse_predicate, DomainSpec, Evaluator, Predicate, Signature, Solver, SolverConfig, VarStyle};
use crate::{Error, Result};

/// Set of state indices.
pub type StateSet = BTreeSet<usize>;

/// Bound used for quantified guards when evaluating concrete events over an
/// unbounded domain.
pub const QUANTIFIER_EVAL_BOUND: i64 = 64;

/// Tag reserved for silent zero-step transitions.
pub const EPSILON: &str = "ε";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    pub source: usize,
    pub target: usize,
    pub tag: String,
    pub k: usize,
    pub guard: Predicate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpEfa {
    pub states: Vec<String>,
    pub tags: Vec<String>,
    pub domain: DomainSpec,
    pub initial: StateSet,
    pub marked: StateSet,
    pub transitions: Vec<Transition>,
}

impl EpEfa {
    pub fn new(domain: DomainSpec) -> Self {
        EpEfa { states: Vec::new(), tags: Vec::new(), domain, initial: StateSet::new(), marked: StateSet::new(), transitions: Vec::new() }
    }

    /// Adds a state (or returns the existing index).
    pub fn add_state(&mut self, name: &str) -> usize {
        match self.state_index(name) {
            Some(i) => i,
            None => {
                self.states.push(name.to_string());
                self.states.len() - 1
            }
        }
    }

    pub fn with_states<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        for n in names {
            self.add_state(n);
        }
        self
    }

    pub fn with_initial<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        self.initial = names.into_iter().map(|n| self.add_state(n)).collect();
        self
    }

    pub fn with_marked<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        self.marked = names.into_iter().map(|n| self.add_state(n)).collect();
        self
    }

    /// Appends a transition; `guard` is an s-expression over `x1..xk`.
    pub fn with_transition(mut self, id: &str, source: &str, tag: &str, k: usize, guard: &str, target: &str) -> Result<Self> {
        let guard = parse_predicate(guard, VarStyle::Plain)?;
        self.push_transition(id, source, tag, k, guard, target);
        Ok(self)
    }

    pub fn push_transition(&mut self, id: &str, source: &str, tag: &str, k: usize, guard: Predicate, target: &str) {
        let source = self.add_state(source);
        let target = self.add_state(target);
        if !self.tags.iter().any(|t| t == tag) {
            self.tags.push(tag.to_string());
        }
        self.transitions.push(Transition { id: id.to_string(), source, target, tag: tag.to_string(), k, guard });
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// Resolves state names, failing on unknown ones.
    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        names
            .iter()
            .map(|n| self.state_index(n.as_ref()).ok_or_else(|| Error::InvalidQuery(format!("unknown state '{}'", n.as_ref()))))
            .collect()
    }

    pub fn names(&self, set: &StateSet) -> Vec<String> {
        set.iter().map(|&i| self.states[i].clone()).collect()
    }

    pub fn all_states(&self) -> StateSet {
        (0..self.states.len()).collect()
    }

    /// Maximum step length over all transitions.
    pub fn step_length(&self) -> usize {
        self.transitions.iter().map(|t| t.k).max().unwrap_or(0)
    }

    pub fn guard_signature(&self, k: usize) -> Signature {
        Signature::uniform(self.domain, k)
    }

    /// All invariant violations, as human-readable diagnostics.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.domain.validate() {
            out.push(e.to_string());
        }
        let n = self.states.len();
        for &q in self.initial.iter().chain(&self.marked) {
            if q >= n {
                out.push(format!("state index {q} out of range"));
            }
        }
        let mut ids = BTreeSet::new();
        for t in &self.transitions {
            if !ids.insert(&t.id) {
                out.push(format!("duplicate transition id '{}'", t.id));
            }
            if t.source >= n || t.target >= n {
                out.push(format!("transition '{}' references an unknown state", t.id));
            }
            if !self.tags.contains(&t.tag) {
                out.push(format!("transition '{}' uses undeclared tag '{}'", t.id, t.tag));
            }
            out.extend(guard_diagnostics(&t.id, t.k, &t.guard, &self.guard_signature(t.k)));
        }
        out
    }

    /// A pair of transitions that can fire on the same concrete event, if any.
    pub fn nondeterministic_pair(&self, cfg: &SolverConfig) -> Result<Option<(usize, usize)>> {
        let mut solver = Solver::new(cfg);
        for (i, a) in self.transitions.iter().enumerate() {
            for (j, b) in self.transitions.iter().enumerate().skip(i + 1) {
                if a.source != b.source || a.tag != b.tag || a.k != b.k {
                    continue;
                }
                if a.k == 0 || solver.is_sat(&a.guard.clone().and(b.guard.clone()), &self.guard_signature(a.k))? {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    pub fn is_deterministic(&self, cfg: &SolverConfig) -> Result<bool> {
        Ok(self.nondeterministic_pair(cfg)?.is_none())
    }

    fn evaluator(&self, k: usize) -> Evaluator {
        let bound = if self.domain.is_bounded() { None } else { Some(QUANTIFIER_EVAL_BOUND) };
        Evaluator::new(&self.guard_signature(k), bound)
    }

    /// Whether transition `t` accepts the concrete event `ev`.
    pub fn enables(&self, t: &Transition, ev: &Event) -> Result<bool> {
        if t.tag != ev.tag || t.k != ev.params.len() || !ev.params.iter().all(|e| self.domain.contains(e)) {
            return Ok(false);
        }
        let flat: Vec<i64> = ev.params.concat();
        self.evaluator(t.k).holds_on(&t.guard, &flat)
    }

    /// Successors of `state` under one concrete event.
    pub fn step(&self, state: usize, ev: &Event) -> Result<StateSet> {
        let mut out = StateSet::new();
        for t in self.transitions.iter().filter(|t| t.source == state) {
            if self.enables(t, ev)? {
                out.insert(t.target);
            }
        }
        Ok(out)
    }

    /// States reached from any of `from` by the whole string `u`.
    pub fn run(&self, from: &StateSet, u: &[Event]) -> Result<StateSet> {
        let mut cur = from.clone();
        for ev in u {
            let mut next = StateSet::new();
            for &q in &cur {
                next.extend(self.step(q, ev)?);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// The reverse automaton: every state initial (and marked), transitions
    /// flipped, guards with their parameter order reversed.
    pub fn reverse(&self) -> EpEfa {
        EpEfa {
            states: self.states.clone(),
            tags: self.tags.clone(),
            domain: self.domain,
            initial: self.all_states(),
            marked: self.all_states(),
            transitions: self
                .transitions
                .iter()
                .map(|t| Transition {
                    id: t.id.clone(),
                    source: t.target,
                    target: t.source,
                    tag: t.tag.clone(),
                    k: t.k,
                    guard: reverse_predicate(&t.guard, t.k),
                })
                .collect(),
        }
    }

    /// Copy with a different initial set.
    pub fn with_initial_set(&self, initial: StateSet) -> EpEfa {
        EpEfa { initial, ..self.clone() }
    }

    /// Transition ids grouped by source state, in declaration order.
    pub fn outgoing(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            m.entry(t.source).or_default().push(i);
        }
        m
    }
}

pub(crate) fn guard_diagnostics(id: &str, k: usize, guard: &Predicate, sig: &Signature) -> Vec<String> {
    let mut out = Vec::new();
    if k == 0 && *guard != Predicate::True {
        out.push(format!("transition '{id}' has step length 0 but a non-true guard"));
    }
    if let Err(e) = guard.check_well_formed(sig) {
        out.push(format!("transition '{id}': {e}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ev(tag: &str, xs: &[i64]) -> Event {
        Event::scalar(tag, xs)
    }

    #[test]
    fn five_state_validates_and_is_deterministic() {
        let s = fixtures::five_state();
        assert!(s.validate().is_empty());
        assert!(s.is_deterministic(&SolverConfig::enumerate(40)).unwrap());
    }

    #[test]
    fn validation_catches_arity_and_zero_step() {
        let s = EpEfa::new(DomainSpec::naturals(1))
            .with_transition("t1", "q0", "a", 2, "(< x3 1)", "q1")
            .unwrap()
            .with_transition("t2", "q0", "b", 0, "(< x1 1)", "q1")
            .unwrap();
        let d = s.validate();
        assert_eq!(d.len(), 3, "{d:?}");
        assert!(d[0].contains("outside arity"));
        assert!(d[1].contains("step length 0"));
    }

    #[test]
    fn determinism_pairs() {
        let dup = EpEfa::new(DomainSpec::naturals(1))
            .with_transition("a", "q", "s", 1, "true", "p")
            .unwrap()
            .with_transition("b", "q", "s", 1, "true", "p")
            .unwrap();
        assert_eq!(dup.nondeterministic_pair(&SolverConfig::enumerate(10)).unwrap(), Some((0, 1)));
        let split = EpEfa::new(DomainSpec::naturals(1))
            .with_transition("a", "q", "s", 1, "(< x1 4)", "p")
            .unwrap()
            .with_transition("b", "q", "s", 1, "(>= x1 4)", "r")
            .unwrap();
        assert!(split.is_deterministic(&SolverConfig::enumerate(10)).unwrap());
    }

    #[test]
    fn five_state_steps() {
        let s = fixtures::five_state();
        let q = |n: &str| s.state_index(n).unwrap();
        assert_eq!(s.step(q("q0"), &ev("sigma2", &[6, 5])).unwrap(), [q("q3")].into());
        assert!(s.step(q("q0"), &ev("sigma1", &[7])).unwrap().is_empty());
        assert_eq!(s.step(q("q1"), &ev("sigma3", &[4, 5])).unwrap(), [q("q2")].into());
    }

    #[test]
    fn five_state_runs() {
        let s = fixtures::five_state();
        let q0: StateSet = [0].into();
        let u = [ev("sigma1", &[2]), ev("sigma3", &[5, 6])];
        assert_eq!(s.names(&s.run(&q0, &u).unwrap()), ["q2"]);
        assert_eq!(s.run(&q0, &[]).unwrap(), q0);
        let v = [ev("sigma2", &[6, 5]), ev("sigma4", &[3])];
        assert_eq!(s.names(&s.run(&q0, &v).unwrap()), ["q4"]);
    }

    #[test]
    fn reverse_flips_guards() {
        let s = fixtures::five_state();
        let r = s.reverse();
        assert_eq!(r.initial, s.all_states());
        let t3 = &r.transitions[2];
        assert_eq!((r.states[t3.source].as_str(), r.states[t3.target].as_str()), ("q2", "q1"));
        assert_eq!(t3.guard.to_string(), "(and (= x1 (+ x2 1)) (> x2 3))");
        let rr = r.reverse();
        assert_eq!(rr.transitions, s.transitions);
    }

    #[test]
    fn epsilon_selfloop_reverse_keeps_shape() {
        let s = EpEfa::new(DomainSpec::naturals(1)).with_initial(["q"]).with_transition("e", "q", EPSILON, 0, "true", "q").unwrap();
        let r = s.reverse();
        assert_eq!(r.transitions, s.transitions);
    }
}
