use std::collections::BTreeMap;
use std::fmt;

use super::{Efa, Update};
use crate::algebra::{
    for_each_tuple, substitute, substitute_term, Backend, DomainKind, Predicate, Signature, Solver, SolverConfig, Term, Var,
};
use crate::model::{DataString, Event, StateSet};
use crate::{Error, Result};

/// Default cap on explored transition sequences.
pub const DEFAULT_SEQUENCE_CAP: usize = 1_000_000;

/// A concrete path into the target set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachWitness {
    pub transitions: Vec<String>,
    /// Visited states, starting with the initial one.
    pub states: Vec<String>,
    pub events: Vec<Event>,
    /// State parameter before the first and after every event.
    pub params: Vec<Vec<i64>>,
}

impl ReachWitness {
    pub fn data_string(&self) -> DataString {
        DataString::of(&self.events)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachResult {
    pub reachable: bool,
    pub depth: usize,
    /// Transition sequences examined (including prefixes).
    pub sequences: usize,
    pub witness: Option<ReachWitness>,
}

impl fmt::Display for ReachResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "unreachable within {}", self.depth),
            Some(w) => {
                write!(f, "reachable within {} ({} events)", self.depth, w.events.len())?;
                write!(f, "\n  states: {}", w.states.join(" "))?;
                let evs: Vec<String> = w.events.iter().map(|e| e.to_string()).collect();
                write!(f, "\n  events: {}", evs.join(" "))?;
                let ps: Vec<String> = w.params.iter().map(|p| format!("{p:?}")).collect();
                write!(f, "\n  params: {}", ps.join(" "))
            }
        }
    }
}

/// Whether some transition sequence of at most `depth` events leads from an
/// initial configuration into `target`. Sound and complete for that depth
/// only; with the enumeration backend, event parameters range over the
/// domain truncated at the configured enumeration bound.
pub fn bounded_reach(e: &Efa, target: &StateSet, depth: usize, cfg: &SolverConfig) -> Result<ReachResult> {
    bounded_reach_with(e, target, depth, cfg, DEFAULT_SEQUENCE_CAP)
}

pub fn bounded_reach_with(e: &Efa, target: &StateSet, depth: usize, cfg: &SolverConfig, cap: usize) -> Result<ReachResult> {
    let d = e.validate();
    if !d.is_empty() {
        return Err(Error::InvalidModel(d.join("; ")));
    }
    match cfg.backend {
        Backend::Enumerate => explicit(e, target, depth, cfg.enumeration_bound, cap),
        Backend::External => symbolic(e, target, depth, cfg, cap),
    }
}

type Path = (Vec<usize>, Vec<Vec<i64>>, Vec<Vec<i64>>);

fn witness(e: &Efa, start: usize, (seq, params, ys): &Path) -> ReachWitness {
    let mut states = vec![e.states[start].clone()];
    let mut events = Vec::new();
    for (ti, p) in seq.iter().zip(params) {
        let t = &e.transitions[*ti];
        states.push(e.states[t.target].clone());
        events.push(Event::new(&t.tag, p.chunks(e.domain.width.max(1)).map(|c| c.to_vec()).collect()));
    }
    ReachWitness { transitions: seq.iter().map(|&ti| e.transitions[ti].id.clone()).collect(), states, events, params: ys.clone() }
}

/// Frontier unrolling: each sequence prefix carries every concrete state
/// parameter it can produce (one sample path per parameter).
fn explicit(e: &Efa, target: &StateSet, depth: usize, bound: i64, cap: usize) -> Result<ReachResult> {
    struct Prefix {
        start: usize,
        state: usize,
        frontier: BTreeMap<Vec<i64>, Path>,
    }
    let out_of = e.outgoing();
    let mut tuples: BTreeMap<usize, Vec<Vec<i64>>> = BTreeMap::new();
    for t in &e.transitions {
        if let std::collections::btree_map::Entry::Vacant(slot) = tuples.entry(t.k) {
            let mut v = Vec::new();
            for_each_tuple(&Signature::uniform(e.domain, t.k), Some(bound), |x| {
                v.push(x.to_vec());
                Ok(true)
            })?;
            slot.insert(v);
        }
    }
    let mut evs: Vec<_> = e.transitions.iter().map(|t| e.evaluator(t.k)).collect();
    let y0s = e.initial_params(bound)?;
    let mut level: Vec<Prefix> = Vec::new();
    for &q in &e.initial {
        let frontier: BTreeMap<_, _> = y0s.iter().map(|y| (y.clone(), (vec![], vec![], vec![y.clone()]))).collect();
        if !frontier.is_empty() {
            level.push(Prefix { start: q, state: q, frontier });
        }
    }
    let mut sequences = level.len();
    for n in 0..=depth {
        if let Some(p) = level.iter().find(|p| target.contains(&p.state)) {
            let path = p.frontier.values().next().expect("non-empty frontier");
            return Ok(ReachResult { reachable: true, depth, sequences, witness: Some(witness(e, p.start, path)) });
        }
        if n == depth {
            break;
        }
        let mut next = Vec::new();
        for p in &level {
            for &ti in out_of.get(&p.state).map(Vec::as_slice).unwrap_or(&[]) {
                let t = &e.transitions[ti];
                let mut frontier = BTreeMap::new();
                for (y, (seq, params, ys)) in &p.frontier {
                    for x in &tuples[&t.k] {
                        if let Some(y2) = e.fire(&mut evs[ti], ti, y, x)? {
                            frontier.entry(y2.clone()).or_insert_with(|| {
                                let mut s = seq.clone();
                                s.push(ti);
                                let mut ps = params.clone();
                                ps.push(x.clone());
                                let mut yy = ys.clone();
                                yy.push(y2);
                                (s, ps, yy)
                            });
                        }
                    }
                }
                if frontier.len() > cap {
                    return Err(Error::ExplosionGuard { what: "reachability frontier", cap });
                }
                if !frontier.is_empty() {
                    sequences += 1;
                    if sequences > cap {
                        return Err(Error::ExplosionGuard { what: "transition sequences", cap });
                    }
                    next.push(Prefix { start: p.start, state: t.target, frontier });
                }
            }
        }
        level = next;
    }
    Ok(ReachResult { reachable: false, depth, sequences, witness: None })
}

fn domain_bounds(kind: DomainKind, t: &Term) -> Vec<Predicate> {
    match kind {
        DomainKind::Integers => vec![],
        DomainKind::Naturals => vec![t.clone().ge(Term::c(0))],
        DomainKind::Bounded(lo, hi) => vec![t.clone().ge(Term::c(lo)), t.clone().le(Term::c(hi))],
    }
}

/// Path constraints per sequence: slot 1 holds the initial parameter, each
/// event's parameters get fresh slots, and later parameters are terms over
/// those.
fn symbolic(e: &Efa, target: &StateSet, depth: usize, cfg: &SolverConfig, cap: usize) -> Result<ReachResult> {
    struct Prefix {
        start: usize,
        state: usize,
        seq: Vec<usize>,
        y: Vec<Term>,
        constraint: Predicate,
        slots: usize,
    }
    let mut solver = Solver::new(cfg);
    let sig = |slots: usize| {
        let mut v = vec![e.state_domain];
        v.extend(std::iter::repeat_n(e.domain, slots - 1));
        Signature::new(v, e.domain)
    };
    let out_of = e.outgoing();
    let y_init: Vec<Term> = (1..=e.state_domain.width).map(|c| Term::comp(1, c)).collect();
    let mut level = Vec::new();
    let mut sequences = 0;
    for &q in &e.initial {
        sequences += 1;
        if solver.check(&e.y0, &sig(1))?.sat {
            level.push(Prefix { start: q, state: q, seq: vec![], y: y_init.clone(), constraint: e.y0.clone(), slots: 1 });
        }
    }
    for n in 0..=depth {
        for p in level.iter().filter(|p| target.contains(&p.state)) {
            let res = solver.check(&p.constraint, &sig(p.slots))?;
            if let Some(flat) = res.witness {
                return Ok(ReachResult { reachable: true, depth, sequences, witness: Some(replay(e, p.start, &p.seq, &flat)?) });
            }
        }
        if n == depth {
            break;
        }
        let mut next = Vec::new();
        for p in &level {
            for &ti in out_of.get(&p.state).map(Vec::as_slice).unwrap_or(&[]) {
                let t = &e.transitions[ti];
                let base = p.slots;
                let map = |v: Var| {
                    if v.param == 1 {
                        p.y[v.comp - 1].clone()
                    } else {
                        Term::Var(Var { param: base + v.param - 1, comp: v.comp })
                    }
                };
                let guard = substitute(&t.guard, &map);
                let y = match &t.update {
                    Update::Keep => p.y.clone(),
                    Update::Assign(ts) => ts.iter().map(|x| substitute_term(x, &map)).collect(),
                };
                let mut parts = vec![p.constraint.clone(), guard];
                for c in &y {
                    parts.extend(domain_bounds(e.state_domain.kind, c));
                }
                let constraint = Predicate::conj(parts);
                let slots = base + t.k;
                sequences += 1;
                if sequences > cap {
                    return Err(Error::ExplosionGuard { what: "transition sequences", cap });
                }
                if solver.check(&constraint, &sig(slots))?.sat {
                    let mut seq = p.seq.clone();
                    seq.push(ti);
                    next.push(Prefix { start: p.start, state: t.target, seq, y, constraint, slots });
                }
            }
        }
        level = next;
    }
    Ok(ReachResult { reachable: false, depth, sequences, witness: None })
}

fn replay(e: &Efa, start: usize, seq: &[usize], flat: &[i64]) -> Result<ReachWitness> {
    let wy = e.state_domain.width;
    let wx = e.domain.width;
    let mut y = flat[..wy].to_vec();
    let mut ys = vec![y.clone()];
    let mut params = Vec::new();
    let mut at = wy;
    for &ti in seq {
        let k = e.transitions[ti].k;
        let x = flat[at..at + k * wx].to_vec();
        at += k * wx;
        let mut ev = e.evaluator(k);
        y = e.fire(&mut ev, ti, &y, &x)?.ok_or_else(|| Error::SolverProtocol("solver model does not replay".into()))?;
        ys.push(y.clone());
        params.push(x);
    }
    Ok(witness(e, start, &(seq.to_vec(), params, ys)))
}
