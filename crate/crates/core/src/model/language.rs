use std::collections::{BTreeSet, VecDeque};

use super::{EpEfa, Event, Unit, QUANTIFIER_EVAL_BOUND};
use crate::algebra::{DomainSpec, Evaluator, Signature};
use crate::{Error, Result};

/// Default cap on enumerated runs or configurations.
pub const DEFAULT_RUN_CAP: usize = 2_000_000;

/// Flat data strings: all of them, and those ending in a marked state.
pub type FlatLanguages = (BTreeSet<Vec<i64>>, BTreeSet<Vec<i64>>);

/// A run from an initial state: the consumed string and the reached state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    pub string: Vec<Event>,
    pub state: usize,
}

/// Every concrete parameter tuple accepted by each transition, restricted
/// to a bounded enumeration window.
#[derive(Clone, Debug)]
pub struct ConcreteMoves {
    pub per_transition: Vec<Vec<Unit>>,
}

pub(crate) fn window_tuples(
    model_domain: &DomainSpec,
    window: &DomainSpec,
    k: usize,
    mut keep: impl FnMut(&[i64]) -> Result<bool>,
) -> Result<Vec<Unit>> {
    if !window.is_bounded() {
        return Err(Error::UnboundedDomain);
    }
    if window.width != model_domain.width {
        return Err(Error::InvalidQuery(format!("window width {} differs from domain width {}", window.width, model_domain.width)));
    }
    let w = window.width;
    let mut out = Vec::new();
    crate::algebra::for_each_tuple(&Signature::uniform(*window, k), None, |t| {
        if t.chunks(w).all(|e| model_domain.contains(e)) && keep(t)? {
            out.push(t.chunks(w).map(|e| e.to_vec()).collect());
        }
        Ok(true)
    })?;
    Ok(out)
}

impl EpEfa {
    /// Guard denotations over `window`, evaluated directly.
    pub fn concrete_moves(&self, window: &DomainSpec) -> Result<ConcreteMoves> {
        let bound = if self.domain.is_bounded() { None } else { Some(QUANTIFIER_EVAL_BOUND) };
        let mut per_transition = Vec::with_capacity(self.transitions.len());
        for t in &self.transitions {
            let mut ev = Evaluator::new(&self.guard_signature(t.k), bound);
            per_transition.push(window_tuples(&self.domain, window, t.k, |flat| ev.holds_on(&t.guard, flat))?);
        }
        Ok(ConcreteMoves { per_transition })
    }

    /// All runs of at most `max_events` events from the initial states, with
    /// parameters drawn from `window`. Sorted canonically.
    pub fn enumerate_language(&self, max_events: usize, window: &DomainSpec, cap: usize) -> Result<Vec<Run>> {
        let moves = self.concrete_moves(window)?;
        let out_of = self.outgoing();
        let mut runs = Vec::new();
        let mut stack: Vec<(Vec<Event>, usize)> = self.initial.iter().map(|&q| (Vec::new(), q)).collect();
        while let Some((u, q)) = stack.pop() {
            if runs.len() >= cap {
                return Err(Error::ExplosionGuard { what: "enumerated runs", cap });
            }
            if u.len() < max_events {
                for &ti in out_of.get(&q).map(Vec::as_slice).unwrap_or(&[]) {
                    let t = &self.transitions[ti];
                    for params in &moves.per_transition[ti] {
                        let mut v = u.clone();
                        v.push(Event { tag: t.tag.clone(), params: params.clone() });
                        stack.push((v, t.target));
                    }
                }
            }
            runs.push(Run { string: u, state: q });
        }
        runs.sort();
        runs.dedup();
        Ok(runs)
    }

    /// Reachable (flat data string, state) pairs whose flat string has at
    /// most `max_flat` values, from the initial states. Zero-step moves are
    /// saturated, so the result is exact for the window.
    pub fn flat_language(&self, max_flat: usize, window: &DomainSpec, cap: usize) -> Result<BTreeSet<(Vec<i64>, usize)>> {
        let moves = self.concrete_moves(window)?;
        let out_of = self.outgoing();
        let mut seen: BTreeSet<(Vec<i64>, usize)> = self.initial.iter().map(|&q| (Vec::new(), q)).collect();
        let mut queue: VecDeque<(Vec<i64>, usize)> = seen.iter().cloned().collect();
        while let Some((flat, q)) = queue.pop_front() {
            for &ti in out_of.get(&q).map(Vec::as_slice).unwrap_or(&[]) {
                let t = &self.transitions[ti];
                for params in &moves.per_transition[ti] {
                    let n: usize = params.iter().map(Vec::len).sum();
                    if flat.len() + n > max_flat {
                        continue;
                    }
                    let mut f = flat.clone();
                    f.extend(params.iter().flatten());
                    if seen.insert((f.clone(), t.target)) {
                        if seen.len() > cap {
                            return Err(Error::ExplosionGuard { what: "flat-language configurations", cap });
                        }
                        queue.push_back((f, t.target));
                    }
                }
            }
        }
        Ok(seen)
    }

    /// `(L_fd, L_fmd)` restricted to flat strings of at most `max_flat` values.
    pub fn flat_data_languages(&self, max_flat: usize, window: &DomainSpec) -> Result<FlatLanguages> {
        let configs = self.flat_language(max_flat, window, DEFAULT_RUN_CAP)?;
        let all = configs.iter().map(|(f, _)| f.clone()).collect();
        let marked = configs.iter().filter(|(_, q)| self.marked.contains(q)).map(|(f, _)| f.clone()).collect();
        Ok((all, marked))
    }
}
