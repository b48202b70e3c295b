//! Symbolic observers: determinized estimate automata whose edges carry
//! minterms over observed parameter tuples.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde_json::json;

use crate::algebra::{compact, exists_project, DomainSpec, Evaluator, Predicate, Signature, Solver, SolverConfig};
use crate::model::{EpEfa, Observation, ObservationSpec, StateSet, Unit};
use crate::{Error, Result};

/// `source --[step: predicate]--> target`; step 0 is a silent edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableTransition {
    pub source: usize,
    pub target: usize,
    pub step: usize,
    pub predicate: Predicate,
    /// Index of the originating model transition.
    pub origin: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObserverLimits {
    pub max_states: usize,
    pub max_sat_checks: u64,
}

impl Default for ObserverLimits {
    fn default() -> Self {
        ObserverLimits { max_states: 10_000, max_sat_checks: 1 << 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObserverEdge {
    pub source: usize,
    pub step: usize,
    /// Disjunction of `minterms` (the minterm itself when there is one).
    pub guard: Predicate,
    pub minterms: Vec<Predicate>,
    pub target: usize,
    /// One observation unit satisfying `guard`.
    pub sample: Unit,
}

#[derive(Clone, Debug)]
pub struct Observer {
    pub states: Vec<StateSet>,
    pub edges: Vec<ObserverEdge>,
    /// BFS tree: the edge through which each state was first reached.
    pub parent: Vec<Option<usize>>,
    pub state_names: Vec<String>,
    pub domain: DomainSpec,
    pub sat_checks: u64,
    eval_bound: Option<i64>,
}

fn subsets_of_size(k: usize, i: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for j in start..=k {
            if k - j + 1 < left {
                break;
            }
            cur.push(j);
            go(j + 1, k, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, k, i, &mut Vec::new(), &mut out);
    out
}

/// The observable transitions: for every model transition of step length
/// `k` and every `i ∈ [0:k]`, the disjunction over all `i`-subsets of
/// observable positions of the projected, renamed guard, kept if satisfiable.
/// Zero-step transitions become silent edges.
pub fn observable_transitions(s: &EpEfa, spec: &ObservationSpec, solver: &mut Solver) -> Result<Vec<ObservableTransition>> {
    let mut out = Vec::new();
    for (ti, t) in s.transitions.iter().enumerate() {
        if t.k == 0 {
            out.push(ObservableTransition { source: t.source, target: t.target, step: 0, predicate: Predicate::True, origin: ti });
            continue;
        }
        for i in 0..=t.k {
            let mut parts = Vec::new();
            for idx in subsets_of_size(t.k, i) {
                let projected = exists_project(&t.guard, t.k, &idx, &spec.theta)?;
                parts.push(compact(&projected, &idx)?);
            }
            let predicate = Predicate::disj(parts);
            if solver.is_sat(&predicate, &Signature::uniform(s.domain, i))? {
                out.push(ObservableTransition { source: t.source, target: t.target, step: i, predicate, origin: ti });
            }
        }
    }
    Ok(out)
}

/// Least superset of `set` closed under silent edges.
pub fn epsilon_closure(edges: &[ObservableTransition], set: &StateSet) -> StateSet {
    let mut out = set.clone();
    let mut work: Vec<usize> = set.iter().copied().collect();
    while let Some(q) = work.pop() {
        for e in edges.iter().filter(|e| e.step == 0 && e.source == q) {
            if out.insert(e.target) {
                work.push(e.target);
            }
        }
    }
    out
}

struct Minterm {
    members: Vec<usize>,
    predicate: Predicate,
    sample: Vec<i64>,
}

fn minterms(preds: &[&Predicate], sig: &Signature, solver: &mut Solver, budget: u64) -> Result<Vec<Minterm>> {
    // Depth-first over include/exclude decisions, pruning unsatisfiable
    // prefixes; the surviving leaves are exactly the satisfiable minterms.
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        prefix: Predicate,
        chosen: &mut Vec<bool>,
        preds: &[&Predicate],
        sig: &Signature,
        solver: &mut Solver,
        budget: u64,
        out: &mut Vec<Minterm>,
    ) -> Result<()> {
        for include in [true, false] {
            let lit = if include { preds[i].clone() } else { preds[i].clone().not() };
            let next = if i == 0 { lit } else { prefix.clone().and(lit) };
            if solver.checks() >= budget {
                return Err(Error::ExplosionGuard { what: "minterm satisfiability checks", cap: budget as usize });
            }
            let res = solver.check(&next, sig)?;
            if !res.sat {
                continue;
            }
            chosen.push(include);
            if i + 1 == preds.len() {
                if chosen.iter().any(|&c| c) {
                    let members: Vec<usize> = (0..preds.len()).filter(|&j| chosen[j]).collect();
                    let pos = members.iter().map(|&j| preds[j].clone());
                    let neg = (0..preds.len()).filter(|&j| !chosen[j]).map(|j| preds[j].clone().not());
                    let predicate = Predicate::conj(pos.chain(neg));
                    out.push(Minterm { members, predicate, sample: res.witness.unwrap_or_default() });
                }
            } else {
                go(i + 1, next, chosen, preds, sig, solver, budget, out)?;
            }
            chosen.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    if !preds.is_empty() {
        go(0, Predicate::True, &mut Vec::new(), preds, sig, solver, budget, &mut out)?;
    }
    Ok(out)
}

/// Outcome of a build that may stop as soon as a state meets a condition.
pub struct BuildOutcome {
    pub observer: Observer,
    /// The first discovered state satisfying the stop condition.
    pub stopped_at: Option<usize>,
}

/// Builds the observer, checking `stop` on every state as it is discovered.
pub fn build_observer_until(
    s: &EpEfa,
    spec: &ObservationSpec,
    cfg: &SolverConfig,
    limits: &ObserverLimits,
    stop: &dyn Fn(&StateSet) -> bool,
) -> Result<BuildOutcome> {
    let mut solver = Solver::new(cfg);
    let that = observable_transitions(s, spec, &mut solver)?;
    let budget = solver.checks() + limits.max_sat_checks;
    let eval_bound = if s.domain.is_bounded() { None } else { Some(cfg.enumeration_bound) };
    let mut obs = Observer {
        states: Vec::new(),
        edges: Vec::new(),
        parent: Vec::new(),
        state_names: s.states.clone(),
        domain: s.domain,
        sat_checks: 0,
        eval_bound,
    };
    let mut index: HashMap<StateSet, usize> = HashMap::new();
    let init = epsilon_closure(&that, &s.initial);
    index.insert(init.clone(), 0);
    obs.states.push(init.clone());
    obs.parent.push(None);
    if stop(&init) {
        obs.sat_checks = solver.checks();
        return Ok(BuildOutcome { observer: obs, stopped_at: Some(0) });
    }
    // Candidate edges grouped by step, ordered by (source state, transition).
    let mut ordered: Vec<&ObservableTransition> = that.iter().filter(|e| e.step > 0).collect();
    ordered.sort_by_key(|e| (e.source, e.origin));
    let mut queue = VecDeque::from([0usize]);
    while let Some(cur) = queue.pop_front() {
        let members = obs.states[cur].clone();
        let mut by_step: BTreeMap<usize, Vec<&ObservableTransition>> = BTreeMap::new();
        for e in ordered.iter().filter(|e| members.contains(&e.source)) {
            by_step.entry(e.step).or_default().push(e);
        }
        let mut fresh: Vec<StateSet> = Vec::new();
        let mut pending: Vec<(usize, StateSet, Minterm)> = Vec::new();
        for (&k, group) in &by_step {
            let preds: Vec<&Predicate> = group.iter().map(|e| &e.predicate).collect();
            let sig = Signature::uniform(s.domain, k);
            for m in minterms(&preds, &sig, &mut solver, budget)? {
                let targets: StateSet = m.members.iter().map(|&j| group[j].target).collect();
                let target = epsilon_closure(&that, &targets);
                if !index.contains_key(&target) && !fresh.contains(&target) {
                    fresh.push(target.clone());
                }
                pending.push((k, target, m));
            }
        }
        fresh.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        let mut stopped = None;
        for set in fresh {
            if obs.states.len() >= limits.max_states {
                return Err(Error::ExplosionGuard { what: "observer states", cap: limits.max_states });
            }
            let id = obs.states.len();
            if stopped.is_none() && stop(&set) {
                stopped = Some(id);
            }
            index.insert(set.clone(), id);
            obs.states.push(set);
            obs.parent.push(None);
            queue.push_back(id);
        }
        // Merge minterms sharing (step, target) into one edge.
        let mut merged: Vec<(usize, usize, Vec<Predicate>, Unit)> = Vec::new();
        for (k, target, m) in pending {
            let t = index[&target];
            match merged.iter_mut().find(|(mk, mt, _, _)| *mk == k && *mt == t) {
                Some(entry) => entry.2.push(m.predicate),
                None => {
                    let sample = m.sample.chunks(s.domain.width).map(|c| c.to_vec()).collect();
                    merged.push((k, t, vec![m.predicate], sample));
                }
            }
        }
        for (k, t, mts, sample) in merged {
            let guard = if mts.len() == 1 { mts[0].clone() } else { Predicate::disj(mts.clone()) };
            let eid = obs.edges.len();
            obs.edges.push(ObserverEdge { source: cur, step: k, guard, minterms: mts, target: t, sample });
            if t != 0 && obs.parent[t].is_none() {
                obs.parent[t] = Some(eid);
            }
        }
        if stopped.is_some() {
            obs.sat_checks = solver.checks();
            return Ok(BuildOutcome { observer: obs, stopped_at: stopped });
        }
    }
    obs.sat_checks = solver.checks();
    Ok(BuildOutcome { observer: obs, stopped_at: None })
}

/// The full observer.
pub fn build_observer(s: &EpEfa, spec: &ObservationSpec, cfg: &SolverConfig) -> Result<Observer> {
    build_observer_with(s, spec, cfg, &ObserverLimits::default())
}

pub fn build_observer_with(s: &EpEfa, spec: &ObservationSpec, cfg: &SolverConfig, limits: &ObserverLimits) -> Result<Observer> {
    Ok(build_observer_until(s, spec, cfg, limits, &|_| false)?.observer)
}

impl Observer {
    pub fn initial(&self) -> &StateSet {
        &self.states[0]
    }

    pub fn find(&self, set: &StateSet) -> Option<usize> {
        self.states.iter().position(|s| s == set)
    }

    /// State names of observer state `i`.
    pub fn names(&self, i: usize) -> Vec<String> {
        self.states[i].iter().map(|&q| self.state_names[q].clone()).collect()
    }

    fn evaluator(&self, k: usize) -> Evaluator {
        Evaluator::new(&Signature::uniform(self.domain, k), self.eval_bound)
    }

    /// One observer move on a unit; `None` when no edge accepts it.
    pub fn step(&self, from: usize, unit: &Unit) -> Result<Option<usize>> {
        let k = unit.len();
        if k == 0 || !unit.iter().all(|e| self.domain.contains(e)) {
            return Ok(None);
        }
        let flat: Vec<i64> = unit.concat();
        let mut ev = self.evaluator(k);
        for e in self.edges.iter().filter(|e| e.source == from && e.step == k) {
            if ev.holds_on(&e.guard, &flat)? {
                return Ok(Some(e.target));
            }
        }
        Ok(None)
    }

    /// Index of the state reached by `w`, or `None` if `w` is not an observation.
    pub fn run(&self, w: &Observation) -> Result<Option<usize>> {
        let mut cur = 0;
        for unit in &w.0 {
            match self.step(cur, unit)? {
                Some(n) => cur = n,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    /// The state estimate after `w`, or `None` (⊥) if `w` is not an observation.
    pub fn estimate(&self, w: &Observation) -> Result<Option<&StateSet>> {
        Ok(self.run(w)?.map(|i| &self.states[i]))
    }

    /// A concrete observation reaching state `i` along the BFS tree.
    pub fn path_to(&self, mut i: usize) -> Observation {
        let mut units = Vec::new();
        while let Some(eid) = self.parent[i] {
            let e = &self.edges[eid];
            units.push(e.sample.clone());
            i = e.source;
        }
        units.reverse();
        Observation(units)
    }

    fn label(&self, i: usize) -> String {
        format!("{{{}}}", self.names(i).join(","))
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph observer {\n  rankdir=LR;\n  node [shape=box];\n");
        s.push_str("  init [shape=point];\n");
        for i in 0..self.states.len() {
            let _ = writeln!(s, "  s{i} [label=\"{}\"];", self.label(i));
        }
        s.push_str("  init -> s0;\n");
        for e in &self.edges {
            let _ = writeln!(s, "  s{} -> s{} [label=\"{}: {}\"];", e.source, e.target, e.step, e.guard);
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "states": (0..self.states.len()).map(|i| self.names(i)).collect::<Vec<_>>(),
            "initial": 0,
            "transitions": self.edges.iter().map(|e| json!({
                "source": e.source,
                "k": e.step,
                "guard": e.guard.to_string(),
                "minterms": e.minterms.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "target": e.target,
            })).collect::<Vec<_>>(),
        })
    }
}
