//! Full EFAs: states carry a parameter vector `y`, guards read `y` and the
//! event parameters, and updates compute the target state's parameter.
//!
//! Guards and update terms use slot 1 for `y` and slots `2..=k+1` for the
//! event parameters (written `y<j>` and `x<i>` in s-expressions).

mod json;
mod reach;
mod transform;
pub mod two_counter;

pub use json::{EfaDoc, EfaTransitionDoc};
pub use reach::{bounded_reach, bounded_reach_with, ReachResult, ReachWitness, DEFAULT_SEQUENCE_CAP};
pub use transform::{embed_ep_efa, flatten_step_length};
pub use two_counter::{encode_2cm, encode_2cm_with, run_2cm, ConregistrationCm, Instr, Program, RunStatus, Trace};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::algebra::{parse_predicate, parse_term, DomainSpec, Evaluator, Predicate, Signature, Term, VarStyle};
use crate::model::language::{window_tuples, DEFAULT_RUN_CAP};
use crate::model::{Event, FlatLanguages, StateSet, QUANTIFIER_EVAL_BOUND};
use crate::{Error, Result};

/// Target-parameter update of a transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Update {
    /// Leaves the parameter unchanged.
    Keep,
    /// One term per component of the state parameter.
    Assign(Vec<Term>),
}

impl Update {
    pub fn parse(terms: &[&str]) -> Result<Self> {
        let ts = terms.iter().map(|t| parse_term(t, VarStyle::StateEvent)).collect::<Result<_>>()?;
        Ok(Update::Assign(ts))
    }

    /// `y ← x1`-style store of the first event parameter (all components).
    pub fn store(width: usize) -> Self {
        Update::Assign((1..=width).map(|c| Term::comp(2, c)).collect())
    }

    fn apply(&self, ev: &mut Evaluator, y: &[i64]) -> Result<Vec<i64>> {
        match self {
            Update::Keep => Ok(y.to_vec()),
            Update::Assign(ts) => ts.iter().map(|t| ev.eval_term(t)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EfaTransition {
    pub id: String,
    pub source: usize,
    pub target: usize,
    pub tag: String,
    pub k: usize,
    pub guard: Predicate,
    pub update: Update,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Efa {
    pub states: Vec<String>,
    pub tags: Vec<String>,
    /// Domain of one event parameter.
    pub domain: DomainSpec,
    /// Domain of the state parameter.
    pub state_domain: DomainSpec,
    pub initial: StateSet,
    pub marked: StateSet,
    /// Admissible parameters of initial states (arity 1, over `y`).
    pub y0: Predicate,
    pub transitions: Vec<EfaTransition>,
}

impl Efa {
    pub fn new(domain: DomainSpec, state_domain: DomainSpec) -> Self {
        Efa {
            states: Vec::new(),
            tags: Vec::new(),
            domain,
            state_domain,
            initial: StateSet::new(),
            marked: StateSet::new(),
            y0: Predicate::True,
            transitions: Vec::new(),
        }
    }

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

    pub fn with_y0(mut self, y0: &str) -> Result<Self> {
        self.y0 = parse_predicate(y0, VarStyle::StateEvent)?;
        Ok(self)
    }

    /// Adds a transition; guard and update terms use the `y`/`x` style, and
    /// `update = None` keeps the parameter.
    #[allow(clippy::too_many_arguments)]
    pub fn with_transition(
        mut self,
        id: &str,
        source: &str,
        tag: &str,
        k: usize,
        guard: &str,
        update: Option<&[&str]>,
        target: &str,
    ) -> Result<Self> {
        let guard = parse_predicate(guard, VarStyle::StateEvent)?;
        let update = match update {
            None => Update::Keep,
            Some(ts) => Update::parse(ts)?,
        };
        self.push_transition(id, source, tag, k, guard, update, target);
        Ok(self)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_transition(&mut self, id: &str, source: &str, tag: &str, k: usize, guard: Predicate, update: Update, target: &str) {
        let source = self.add_state(source);
        let target = self.add_state(target);
        if !self.tags.iter().any(|t| t == tag) {
            self.tags.push(tag.to_string());
        }
        self.transitions.push(EfaTransition { id: id.to_string(), source, target, tag: tag.to_string(), k, guard, update });
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        names
            .iter()
            .map(|n| self.state_index(n.as_ref()).ok_or_else(|| Error::InvalidQuery(format!("unknown state '{}'", n.as_ref()))))
            .collect()
    }

    pub fn names(&self, set: &StateSet) -> Vec<String> {
        set.iter().map(|&q| self.states[q].clone()).collect()
    }

    pub fn step_length(&self) -> usize {
        self.transitions.iter().map(|t| t.k).max().unwrap_or(0)
    }

    /// Slot 1 ranges over the state domain, slots `2..=k+1` over the event domain.
    pub fn guard_signature(&self, k: usize) -> Signature {
        let mut slots = vec![self.state_domain];
        slots.extend(std::iter::repeat_n(self.domain, k));
        Signature::new(slots, self.domain)
    }

    pub fn y0_signature(&self) -> Signature {
        Signature::new(vec![self.state_domain], self.domain)
    }

    fn eval_bound(&self) -> Option<i64> {
        if self.domain.is_bounded() && self.state_domain.is_bounded() {
            None
        } else {
            Some(QUANTIFIER_EVAL_BOUND)
        }
    }

    pub(crate) fn evaluator(&self, k: usize) -> Evaluator {
        Evaluator::new(&self.guard_signature(k), self.eval_bound())
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for d in [&self.domain, &self.state_domain] {
            if let Err(e) = d.validate() {
                out.push(e.to_string());
            }
        }
        let n = self.states.len();
        for &q in self.initial.iter().chain(&self.marked) {
            if q >= n {
                out.push(format!("state index {q} out of range"));
            }
        }
        if let Err(e) = self.y0.check_well_formed(&self.y0_signature()) {
            out.push(format!("y0: {e}"));
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
            let sig = self.guard_signature(t.k);
            if let Err(e) = t.guard.check_well_formed(&sig) {
                out.push(format!("transition '{}': {e}", t.id));
            }
            if let Update::Assign(ts) = &t.update {
                if ts.len() != self.state_domain.width {
                    out.push(format!(
                        "transition '{}': update has {} terms, state parameter width is {}",
                        t.id,
                        ts.len(),
                        self.state_domain.width
                    ));
                }
                for term in ts {
                    let probe = term.clone().equals(Term::c(0));
                    if let Err(e) = probe.check_well_formed(&sig) {
                        out.push(format!("transition '{}': update {e}", t.id));
                    }
                }
            }
        }
        out
    }

    pub fn outgoing(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            m.entry(t.source).or_default().push(i);
        }
        m
    }

    /// Target parameter of transition `ti` fired from `y` on `params`, or
    /// `None` if the guard fails or the result leaves the state domain.
    pub(crate) fn fire(&self, ev: &mut Evaluator, ti: usize, y: &[i64], params: &[i64]) -> Result<Option<Vec<i64>>> {
        let t = &self.transitions[ti];
        ev.load(&[y, params].concat());
        if !ev.holds(&t.guard)? {
            return Ok(None);
        }
        let next = t.update.apply(ev, y)?;
        Ok(self.state_domain.contains(&next).then_some(next))
    }

    /// Concrete successors of `(state, y)` on one parameterized event.
    pub fn efa_step(&self, state: usize, y: &[i64], event: &Event) -> Result<BTreeSet<(usize, Vec<i64>)>> {
        if y.len() != self.state_domain.width {
            return Err(Error::InvalidQuery(format!("state parameter needs {} components", self.state_domain.width)));
        }
        let mut out = BTreeSet::new();
        if !event.params.iter().all(|e| self.domain.contains(e)) {
            return Ok(out);
        }
        let flat: Vec<i64> = event.params.concat();
        for (ti, t) in self.transitions.iter().enumerate() {
            if t.source != state || t.tag != event.tag || t.k != event.params.len() {
                continue;
            }
            let mut ev = self.evaluator(t.k);
            if let Some(next) = self.fire(&mut ev, ti, y, &flat)? {
                out.insert((t.target, next));
            }
        }
        Ok(out)
    }

    /// Runs a string from every admissible initial configuration in `starts`.
    pub fn run(&self, starts: &BTreeSet<(usize, Vec<i64>)>, u: &[Event]) -> Result<BTreeSet<(usize, Vec<i64>)>> {
        let mut cur = starts.clone();
        for e in u {
            let mut next = BTreeSet::new();
            for (q, y) in &cur {
                next.extend(self.efa_step(*q, y, e)?);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// State parameters satisfying `y0`, enumerated over the state domain
    /// (unbounded components truncated at `bound`).
    pub fn initial_params(&self, bound: i64) -> Result<Vec<Vec<i64>>> {
        let mut ev = Evaluator::new(&self.y0_signature(), self.eval_bound());
        let mut out = Vec::new();
        for y in self.state_domain.elements(Some(bound))? {
            if ev.holds_on(&self.y0, &y)? {
                out.push(y);
            }
        }
        Ok(out)
    }

    /// Reachable `(flat data string, state)` pairs with flat strings of at
    /// most `max_flat` values; event parameters range over `window`, initial
    /// state parameters over the state domain truncated at the window's upper
    /// bound.
    pub fn flat_language(&self, max_flat: usize, window: &DomainSpec, cap: usize) -> Result<BTreeSet<(Vec<i64>, usize)>> {
        let (_, hi) = window.component_range(None)?;
        let out_of = self.outgoing();
        let moves: Vec<Vec<Vec<i64>>> = self
            .transitions
            .iter()
            .map(|t| Ok(window_tuples(&self.domain, window, t.k, |_| Ok(true))?.iter().map(|u| u.concat()).collect()))
            .collect::<Result<_>>()?;
        let mut evs: Vec<Evaluator> = self.transitions.iter().map(|t| self.evaluator(t.k)).collect();
        let mut seen: BTreeSet<(Vec<i64>, usize, Vec<i64>)> = BTreeSet::new();
        for y in self.initial_params(hi)? {
            for &q in &self.initial {
                seen.insert((Vec::new(), q, y.clone()));
            }
        }
        let mut queue: VecDeque<_> = seen.iter().cloned().collect();
        while let Some((flat, q, y)) = queue.pop_front() {
            for &ti in out_of.get(&q).map(Vec::as_slice).unwrap_or(&[]) {
                let t = &self.transitions[ti];
                if flat.len() + t.k * self.domain.width > max_flat {
                    continue;
                }
                for params in &moves[ti] {
                    let Some(next) = self.fire(&mut evs[ti], ti, &y, params)? else { continue };
                    let mut f = flat.clone();
                    f.extend(params);
                    let cfg = (f, t.target, next);
                    if !seen.contains(&cfg) {
                        if seen.len() >= cap {
                            return Err(Error::ExplosionGuard { what: "flat-language configurations", cap });
                        }
                        seen.insert(cfg.clone());
                        queue.push_back(cfg);
                    }
                }
            }
        }
        Ok(seen.into_iter().map(|(f, q, _)| (f, q)).collect())
    }

    /// `(L_fd, L_fmd)` restricted to flat strings of at most `max_flat` values.
    pub fn flat_data_languages(&self, max_flat: usize, window: &DomainSpec) -> Result<FlatLanguages> {
        let configs = self.flat_language(max_flat, window, DEFAULT_RUN_CAP)?;
        let all = configs.iter().map(|(f, _)| f.clone()).collect();
        let marked = configs.iter().filter(|(_, q)| self.marked.contains(q)).map(|(f, _)| f.clone()).collect();
        Ok((all, marked))
    }
}
