//! Brute-force reference over bounded windows: concrete state estimates and
//! definition-level opacity checks. Guards are evaluated by direct
//! substitution of concrete tuples; no solver is involved.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{for_each_tuple, DomainSpec, Evaluator, Predicate, Signature, Solver, SolverConfig, Term};
use crate::model::{DataString, EpEfa, Event, Observation, ObservationSpec, StateSet, Unit};
use crate::observer::{build_observer, observable_transitions};
use crate::opacity::{check_current_state, check_infinite_step, check_initial_state, OpacityQuery, Property};
use crate::{Error, Result};

/// Parameter values and observation length explored by the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleWindow {
    /// Bounded domain the event parameters are drawn from.
    pub domain: DomainSpec,
    /// Maximum number of observable units. Moves producing no observable
    /// unit are saturated, so runs may be longer.
    pub max_units: usize,
}

impl OracleWindow {
    pub fn new(domain: DomainSpec, max_units: usize) -> Result<Self> {
        if !domain.is_bounded() {
            return Err(Error::UnboundedDomain);
        }
        Ok(OracleWindow { domain, max_units })
    }

    /// `[lo:hi]` of the model's width.
    pub fn range(s: &EpEfa, lo: i64, hi: i64, max_units: usize) -> Result<Self> {
        Self::new(DomainSpec::bounded(lo, hi, s.domain.width), max_units)
    }
}

/// Cap on distinct observations the oracle will enumerate.
pub const ORACLE_OBSERVATION_CAP: usize = 2_000_000;

type Mask = u64;

fn to_set(m: Mask) -> StateSet {
    (0..64).filter(|i| m >> i & 1 == 1).collect()
}

fn to_mask(s: &StateSet) -> Mask {
    s.iter().fold(0, |m, &q| m | 1 << q)
}

/// One concrete move: transition, parameters and their observable part.
struct Move {
    ti: usize,
    params: Unit,
    observed: Unit,
}

struct Explorer<'a> {
    s: &'a EpEfa,
    /// Per state: moves without an observable unit.
    silent: Vec<Vec<Move>>,
    /// Per state: observable unit -> moves.
    visible: Vec<BTreeMap<Unit, Vec<Move>>>,
}

impl<'a> Explorer<'a> {
    fn new(s: &'a EpEfa, theta: &ObservationSpec, window: &OracleWindow) -> Result<Self> {
        if s.states.len() > 64 {
            return Err(Error::InvalidQuery("the oracle handles at most 64 states".into()));
        }
        let moves = s.concrete_moves(&window.domain)?;
        let mut ev = theta.evaluator(&s.domain);
        let n = s.states.len();
        let mut silent: Vec<Vec<Move>> = (0..n).map(|_| Vec::new()).collect();
        let mut visible: Vec<BTreeMap<Unit, Vec<Move>>> = (0..n).map(|_| BTreeMap::new()).collect();
        for (ti, tuples) in moves.per_transition.into_iter().enumerate() {
            let src = s.transitions[ti].source;
            for params in tuples {
                let mut observed = Vec::new();
                for e in &params {
                    if theta.observes(&mut ev, e)? {
                        observed.push(e.clone());
                    }
                }
                let mv = Move { ti, params, observed };
                if mv.observed.is_empty() {
                    silent[src].push(mv);
                } else {
                    visible[src].entry(mv.observed.clone()).or_default().push(mv);
                }
            }
        }
        Ok(Explorer { s, silent, visible })
    }

    fn target(&self, mv: &Move) -> usize {
        self.s.transitions[mv.ti].target
    }

    fn close(&self, mut m: Mask) -> Mask {
        let mut work: Vec<usize> = to_set(m).into_iter().collect();
        while let Some(q) = work.pop() {
            for mv in &self.silent[q] {
                let t = self.target(mv);
                if m >> t & 1 == 0 {
                    m |= 1 << t;
                    work.push(t);
                }
            }
        }
        m
    }

    /// Estimates of every observation with at most `max_units` units.
    fn estimates(&self, initial: &StateSet, max_units: usize) -> Result<BTreeMap<Observation, Mask>> {
        let mut out = BTreeMap::new();
        let root = self.close(to_mask(initial));
        if root == 0 {
            return Ok(out);
        }
        out.insert(Observation::empty(), root);
        let mut queue = VecDeque::from([(Observation::empty(), root)]);
        while let Some((w, m)) = queue.pop_front() {
            if w.units() == max_units {
                continue;
            }
            let mut succ: BTreeMap<&Unit, Mask> = BTreeMap::new();
            for q in to_set(m) {
                for (u, mvs) in &self.visible[q] {
                    let e = succ.entry(u).or_insert(0);
                    for mv in mvs {
                        *e |= 1 << self.target(mv);
                    }
                }
            }
            for (u, m2) in succ {
                let m2 = self.close(m2);
                let mut w2 = w.clone();
                w2.0.push(u.clone());
                if out.len() >= ORACLE_OBSERVATION_CAP {
                    return Err(Error::ExplosionGuard { what: "oracle observations", cap: ORACLE_OBSERVATION_CAP });
                }
                out.insert(w2.clone(), m2);
                queue.push_back((w2, m2));
            }
        }
        Ok(out)
    }

    /// Observable successors of an estimate, before closure.
    fn successors(&self, m: Mask) -> BTreeMap<&Unit, Mask> {
        let mut succ: BTreeMap<&Unit, Mask> = BTreeMap::new();
        for q in to_set(m) {
            for (u, mvs) in &self.visible[q] {
                let e = succ.entry(u).or_insert(0);
                for mv in mvs {
                    *e |= 1 << self.target(mv);
                }
            }
        }
        succ
    }

    /// Breadth-first search over pairs of estimates driven by the
    /// observations of the first component. Each distinct pair is listed
    /// once, with a shortest observation reaching it; every observation of
    /// at most `max_units` units leads to a listed pair.
    fn pairs(&self, a: Mask, b: Mask, max_units: usize) -> Vec<(Mask, Mask, Observation)> {
        let start = (self.close(a), self.close(b));
        if start.0 == 0 {
            return Vec::new();
        }
        let mut seen = BTreeMap::from([(start, ())]);
        let mut out = vec![(start.0, start.1, Observation::empty())];
        let mut at = 0;
        while at < out.len() {
            let (ma, mb, w) = out[at].clone();
            at += 1;
            if w.units() == max_units {
                continue;
            }
            let sb = self.successors(mb);
            for (u, na) in self.successors(ma) {
                let next = (self.close(na), self.close(sb.get(u).copied().unwrap_or(0)));
                if seen.insert(next, ()).is_none() {
                    let mut w2 = w.clone();
                    w2.0.push(u.clone());
                    out.push((next.0, next.1, w2));
                }
            }
        }
        out
    }

    /// A concrete string from `from` with observation `w` ending in `to`.
    fn string<'m>(&'m self, from: &StateSet, w: &Observation, to: &StateSet) -> Option<Vec<Event>> {
        // BFS over (units consumed, state) with parent links.
        type Node = (usize, usize);
        let mut parent: BTreeMap<Node, Option<(Node, &'m Move)>> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &q in from {
            parent.insert((0, q), None);
            queue.push_back((0, q));
        }
        let mut hit = None;
        while let Some((i, q)) = queue.pop_front() {
            if i == w.units() && to.contains(&q) {
                hit = Some((i, q));
                break;
            }
            let mut push = |node: (usize, usize), mv: &'m Move| {
                if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(node) {
                    e.insert(Some(((i, q), mv)));
                    queue.push_back(node);
                }
            };
            for mv in &self.silent[q] {
                push((i, self.target(mv)), mv);
            }
            if i < w.units() {
                for mv in self.visible[q].get(&w.0[i]).map(Vec::as_slice).unwrap_or(&[]) {
                    push((i + 1, self.target(mv)), mv);
                }
            }
        }
        let mut node = hit?;
        let mut events = Vec::new();
        while let Some(Some((prev, mv))) = parent.get(&node) {
            events.push(Event::new(&self.s.transitions[mv.ti].tag, mv.params.clone()));
            node = *prev;
        }
        events.reverse();
        Some(events)
    }
}

/// `Est(w)` for every observation of at most `window.max_units` units.
pub fn oracle_estimates(s: &EpEfa, theta: &ObservationSpec, window: &OracleWindow) -> Result<BTreeMap<Observation, StateSet>> {
    let ex = Explorer::new(s, theta, window)?;
    Ok(ex.estimates(&s.initial, window.max_units)?.into_iter().map(|(w, m)| (w, to_set(m))).collect())
}

/// Outcome of a window-restricted check. A violation refutes opacity; its
/// absence only says none exists inside the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowVerdict {
    pub violated: bool,
    pub observation: Option<Observation>,
    /// Infinite-step only: the observation of the continuation.
    pub continuation: Option<Observation>,
    /// A concrete secret run with that observation.
    pub secret_run: Option<Vec<Event>>,
    /// Distinct estimate configurations examined.
    pub checked: usize,
}

impl WindowVerdict {
    fn clean(checked: usize) -> Self {
        WindowVerdict { violated: false, observation: None, continuation: None, secret_run: None, checked }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({ "violation": self.violated, "checked": self.checked });
        if let Some(w) = &self.observation {
            v["observation"] = w.to_json();
        }
        if let Some(c) = &self.continuation {
            v["continuation"] = c.to_json();
        }
        if let Some(u) = &self.secret_run {
            v["secret_run"] = serde_json::json!(u.iter().map(|e| e.to_string()).collect::<Vec<_>>());
        }
        v
    }
}

impl std::fmt::Display for WindowVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if !self.violated {
            return write!(f, "no violation within window ({} estimate configurations)", self.checked);
        }
        write!(f, "violation")?;
        if let Some(w) = &self.observation {
            write!(f, "\n  observation: {w}")?;
        }
        if let Some(c) = &self.continuation {
            write!(f, "\n  continuation: {c}")?;
        }
        if let Some(u) = &self.secret_run {
            let s: Vec<String> = u.iter().map(|e| e.to_string()).collect();
            write!(f, "\n  secret run: {}", s.join(" "))?;
        }
        Ok(())
    }
}

/// Every secret-reaching observation needs a non-secret-reaching twin.
pub fn oracle_cso(s: &EpEfa, q: &OpacityQuery, window: &OracleWindow) -> Result<WindowVerdict> {
    let ex = Explorer::new(s, &q.theta, window)?;
    let (sec, ns) = (to_mask(&q.secret), to_mask(&q.nonsecret));
    let init = to_mask(&s.initial);
    let reach = ex.pairs(init, 0, window.max_units);
    for (m, _, w) in &reach {
        if m & sec != 0 && m & ns == 0 {
            return Ok(WindowVerdict {
                violated: true,
                observation: Some(w.clone()),
                continuation: None,
                secret_run: ex.string(&s.initial, w, &q.secret),
                checked: reach.len(),
            });
        }
    }
    Ok(WindowVerdict::clean(reach.len()))
}

/// Every observation of a run from a secret initial state is also produced
/// from some non-secret initial state.
pub fn oracle_iso(s: &EpEfa, q: &OpacityQuery, window: &OracleWindow) -> Result<WindowVerdict> {
    let ex = Explorer::new(s, &q.theta, window)?;
    let reach = ex.pairs(to_mask(&q.secret), to_mask(&q.nonsecret), window.max_units);
    for (_, mns, w) in &reach {
        if *mns == 0 {
            return Ok(WindowVerdict {
                violated: true,
                observation: Some(w.clone()),
                continuation: None,
                secret_run: ex.string(&q.secret, w, &s.all_states()),
                checked: reach.len(),
            });
        }
    }
    Ok(WindowVerdict::clean(reach.len()))
}

/// For every split `w · ŵ` with a secret state between the two parts, some
/// non-secret state between them admits the same pair of observations.
pub fn oracle_inf(s: &EpEfa, q: &OpacityQuery, window: &OracleWindow) -> Result<WindowVerdict> {
    let ex = Explorer::new(s, &q.theta, window)?;
    let (sec, ns) = (to_mask(&q.secret), to_mask(&q.nonsecret));
    let mut checked = 0;
    for (m, _, w) in ex.pairs(to_mask(&s.initial), 0, window.max_units) {
        for qs in to_set(m & sec) {
            let futures = ex.pairs(1 << qs, m & ns, window.max_units - w.units());
            checked += futures.len();
            if let Some((_, _, w2)) = futures.into_iter().find(|(_, mns, _)| *mns == 0) {
                return Ok(WindowVerdict {
                    violated: true,
                    secret_run: ex.string(&s.initial, &w, &StateSet::from([qs])),
                    observation: Some(w),
                    continuation: Some(w2),
                    checked,
                });
            }
        }
    }
    Ok(WindowVerdict::clean(checked))
}

pub fn oracle_check(s: &EpEfa, q: &OpacityQuery, window: &OracleWindow) -> Result<WindowVerdict> {
    match q.property {
        Property::CurrentState => oracle_cso(s, q, window),
        Property::InitialState => oracle_iso(s, q, window),
        Property::InfiniteStep => oracle_inf(s, q, window),
    }
}

/// Every unit of length `1..=k` over the window, in canonical order.
pub fn all_units(window: &DomainSpec, k: usize) -> Result<Vec<Unit>> {
    let elems = window.elements(None)?;
    let mut out: Vec<Unit> = Vec::new();
    let mut layer: Vec<Unit> = vec![Vec::new()];
    for _ in 0..k {
        layer = layer.iter().flat_map(|u| elems.iter().map(move |e| [u.clone(), vec![e.clone()]].concat())).collect();
        out.extend(layer.iter().cloned());
    }
    Ok(out)
}

/// Differences between observer and oracle estimates on every observation
/// of at most `window.max_units` units, including observations one side
/// accepts and the other rejects. Observations leading to an already
/// compared (estimate, observer state) pair at no smaller depth are covered
/// by that comparison. Returns the number of observations covered.
pub fn compare_with_observer(
    s: &EpEfa,
    theta: &ObservationSpec,
    window: &OracleWindow,
    cfg: &SolverConfig,
) -> Result<(usize, Vec<String>)> {
    let obs = build_observer(s, theta, cfg)?;
    let ex = Explorer::new(s, theta, window)?;
    let units = all_units(&window.domain, s.step_length())?;
    let mut moves: BTreeMap<usize, Vec<Option<usize>>> = BTreeMap::new();
    let mut problems = Vec::new();
    let root = ex.close(to_mask(&s.initial));
    if root == 0 && obs.states.is_empty() {
        return Ok((0, problems));
    }
    if obs.states.first() != Some(&to_set(root)) {
        problems.push(format!("ε: oracle {:?}, observer {:?}", to_set(root), obs.states.first()));
        return Ok((0, problems));
    }
    let mut order = vec![(root, 0usize, Observation::empty())];
    let mut seen = BTreeMap::from([((root, 0usize), ())]);
    let mut at = 0;
    while at < order.len() {
        let (m, i, w) = order[at].clone();
        at += 1;
        if w.units() == window.max_units {
            continue;
        }
        if let std::collections::btree_map::Entry::Vacant(slot) = moves.entry(i) {
            slot.insert(units.iter().map(|u| obs.step(i, u)).collect::<Result<Vec<_>>>()?);
        }
        let succ = ex.successors(m);
        for (u, got) in units.iter().zip(&moves[&i]) {
            let want = succ.get(u).map(|&n| ex.close(n));
            match (want, *got) {
                (None, None) => {}
                (Some(n), Some(j)) if to_set(n) == obs.states[j] => {
                    if seen.insert((n, j), ()).is_none() {
                        let mut w2 = w.clone();
                        w2.0.push(u.clone());
                        order.push((n, j, w2));
                    }
                }
                (want, got) => {
                    let mut w2 = w.clone();
                    w2.0.push(u.clone());
                    problems.push(format!("{w2}: oracle {:?}, observer {:?}", want.map(to_set), got.map(|j| &obs.states[j])));
                    if problems.len() > 10 {
                        return Ok((0, problems));
                    }
                }
            }
        }
    }
    let n = count_observations(&ex, root, window.max_units, &mut BTreeMap::new());
    Ok((n, problems))
}

/// Number of observations of at most `left` units from estimate `m`.
fn count_observations(ex: &Explorer, m: Mask, left: usize, memo: &mut BTreeMap<(Mask, usize), usize>) -> usize {
    if let Some(&n) = memo.get(&(m, left)) {
        return n;
    }
    let mut n = 1;
    if left > 0 {
        for (_, next) in ex.successors(m) {
            n += count_observations(ex, ex.close(next), left - 1, memo);
        }
    }
    memo.insert((m, left), n);
    n
}

/// Minterm sanity at every observer state and step length: pairwise
/// disjointness (by satisfiability of each conjunction) and coverage (the
/// minterms together accept exactly the units some member transition
/// accepts, compared by evaluation over the window). Returns the number of
/// (state, step) groups examined and any problems.
pub fn check_minterms(s: &EpEfa, theta: &ObservationSpec, window: &OracleWindow, cfg: &SolverConfig) -> Result<(usize, Vec<String>)> {
    let obs = build_observer(s, theta, cfg)?;
    let mut solver = Solver::new(cfg);
    let ots = observable_transitions(s, theta, &mut solver)?;
    let bound = if s.domain.is_bounded() { None } else { Some(crate::model::QUANTIFIER_EVAL_BOUND) };
    let mut problems = Vec::new();
    let mut groups = 0;
    for (i, set) in obs.states.iter().enumerate() {
        for k in 1..=s.step_length() {
            let members: Vec<&Predicate> = ots.iter().filter(|t| t.step == k && set.contains(&t.source)).map(|t| &t.predicate).collect();
            let minterms: Vec<&Predicate> = obs.edges.iter().filter(|e| e.source == i && e.step == k).flat_map(|e| &e.minterms).collect();
            if members.is_empty() && minterms.is_empty() {
                continue;
            }
            groups += 1;
            let sig = Signature::uniform(s.domain, k);
            for a in 0..minterms.len() {
                for b in a + 1..minterms.len() {
                    if solver.is_sat(&minterms[a].clone().and(minterms[b].clone()), &sig)? {
                        problems.push(format!("state {i}, step {k}: minterms {a} and {b} overlap"));
                    }
                }
            }
            let mut ev = Evaluator::new(&sig, bound);
            let mut ev2 = Evaluator::new(&sig, bound);
            for_each_tuple(&Signature::uniform(window.domain, k), None, |flat| {
                let covered = minterms.iter().try_fold(false, |acc, m| Ok::<_, Error>(acc || ev.holds_on(m, flat)?))?;
                let wanted = members.iter().try_fold(false, |acc, m| Ok::<_, Error>(acc || ev2.holds_on(m, flat)?))?;
                if covered != wanted {
                    problems.push(format!("state {i}, step {k}: coverage differs at {flat:?}"));
                    return Ok(false);
                }
                Ok(true)
            })?;
        }
    }
    Ok((groups, problems))
}

/// Small random model over `[0:7]`: at most 4 states, 6 transitions and
/// step length 2.
pub fn random_model(seed: u64) -> EpEfa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let mut s = EpEfa::new(DomainSpec::bounded(0, 7, 1)).with_states(names.iter().map(String::as_str));
    let mut initial = StateSet::from([0]);
    if rng.gen_bool(0.25) {
        initial.insert(rng.gen_range(0..n));
    }
    s.initial = initial;
    s.marked = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
    let m = rng.gen_range(1..=6);
    for i in 0..m {
        let k = if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..=2) };
        let guard = if k == 0 { Predicate::True } else { random_guard(&mut rng, k, 2) };
        let tag = ["a", "b", "c"][rng.gen_range(0..3)];
        let (src, tgt) = (rng.gen_range(0..n), rng.gen_range(0..n));
        s.push_transition(&format!("t{}", i + 1), &names[src], tag, k, guard, &names[tgt]);
    }
    s
}

fn random_atom(rng: &mut ChaCha8Rng, k: usize) -> Predicate {
    use crate::algebra::Rel;
    let rels = [Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge];
    let rel = rels[rng.gen_range(0..rels.len())];
    let xi = Term::var(rng.gen_range(1..=k));
    match rng.gen_range(0..10) {
        0..=4 => xi.rel(rel, Term::c(rng.gen_range(0..=7))),
        5 | 6 if k == 2 => xi.rel(rel, Term::var(rng.gen_range(1..=2)) + Term::c(rng.gen_range(-2..=2))),
        7 if k == 2 => (Term::var(1) + Term::var(2)).rel(rel, Term::c(rng.gen_range(0..=14))),
        8 => {
            let b = k + 1;
            let body = Term::var(b).rel(rel, xi).and(Term::var(b).lt(Term::c(rng.gen_range(1..=7))));
            Predicate::exists(b, body)
        }
        _ => xi.rel(rel, Term::c(rng.gen_range(0..=7))),
    }
}

fn random_guard(rng: &mut ChaCha8Rng, k: usize, depth: usize) -> Predicate {
    if depth == 0 || rng.gen_bool(0.5) {
        return random_atom(rng, k);
    }
    match rng.gen_range(0..3) {
        0 => random_guard(rng, k, depth - 1).and(random_guard(rng, k, depth - 1)),
        1 => random_guard(rng, k, depth - 1).or(random_guard(rng, k, depth - 1)),
        _ => random_guard(rng, k, depth - 1).not(),
    }
}

/// A random observability condition on `[0:7]`.
pub fn random_theta(seed: u64) -> ObservationSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7e7a);
    let x = Term::var(1);
    let c = rng.gen_range(0..=7);
    ObservationSpec::new(match rng.gen_range(0..8) {
        0 => Predicate::True,
        1 => Predicate::False,
        2 | 3 => x.ge(Term::c(c)),
        4 => x.lt(Term::c(c)),
        5 => x.differs(Term::c(c)),
        _ => x.clone().lt(Term::c(c / 2)).or(x.gt(Term::c(c))),
    })
}

/// Random secret and non-secret sets for `s` (subsets of the initial states
/// for initial-state opacity).
pub fn random_query(s: &EpEfa, property: Property, theta: ObservationSpec, seed: u64) -> OpacityQuery {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0dd_ba11);
    let pool: Vec<usize> = match property {
        Property::InitialState => s.initial.iter().copied().collect(),
        _ => (0..s.states.len()).collect(),
    };
    let mut pick = || pool.iter().copied().filter(|_| rng.gen_bool(0.4)).collect::<StateSet>();
    let secret = pick();
    let nonsecret = pick();
    OpacityQuery::new(property, secret, nonsecret, theta)
}

/// Aggregate of a randomized cross-check. Failure lists are sorted by model
/// seed, so the report does not depend on scheduling.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SelftestReport {
    pub models: usize,
    /// Observations compared between observer and oracle.
    pub observations: usize,
    /// (observer state, step length) groups whose minterms were checked.
    pub minterm_groups: usize,
    /// Opacity verdicts compared with the oracle and with each other.
    pub verdicts: usize,
    /// Runs replayed backwards on the reverse model.
    pub reversed_runs: usize,
    pub estimate_failures: Vec<String>,
    pub minterm_failures: Vec<String>,
    pub verdict_failures: Vec<String>,
    /// Initial-state verdicts differing from current-state verdicts of the
    /// reverse model.
    pub identity_failures: Vec<String>,
    pub reversal_failures: Vec<String>,
}

impl SelftestReport {
    pub fn agree(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn failures(&self) -> impl Iterator<Item = &String> {
        self.estimate_failures
            .iter()
            .chain(&self.minterm_failures)
            .chain(&self.verdict_failures)
            .chain(&self.identity_failures)
            .chain(&self.reversal_failures)
    }

    fn merge(&mut self, o: SelftestReport) {
        self.models += o.models;
        self.observations += o.observations;
        self.minterm_groups += o.minterm_groups;
        self.verdicts += o.verdicts;
        self.reversed_runs += o.reversed_runs;
        self.estimate_failures.extend(o.estimate_failures);
        self.minterm_failures.extend(o.minterm_failures);
        self.verdict_failures.extend(o.verdict_failures);
        self.identity_failures.extend(o.identity_failures);
        self.reversal_failures.extend(o.reversal_failures);
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "agree": self.agree(),
            "models": self.models,
            "observations": self.observations,
            "minterm_groups": self.minterm_groups,
            "verdicts": self.verdicts,
            "reversed_runs": self.reversed_runs,
            "failures": self.failures().collect::<Vec<_>>(),
        })
    }
}

impl std::fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} models, {} observations, {} minterm groups, {} verdicts, {} reversed runs",
            if self.agree() { "agree" } else { "DISAGREE" },
            self.models,
            self.observations,
            self.minterm_groups,
            self.verdicts,
            self.reversed_runs
        )?;
        for p in self.failures() {
            write!(f, "\n  {p}")?;
        }
        Ok(())
    }
}

/// Seed of the `i`-th model of a self-test run.
pub fn model_seed(seed: u64, i: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i)
}

/// All checks on one random model.
pub fn selftest_model(seed: u64, max_units: usize, cfg: &SolverConfig) -> Result<SelftestReport> {
    let s = random_model(seed);
    let theta = random_theta(seed);
    let window = OracleWindow::new(s.domain, max_units)?;
    let tag = |p: String| format!("seed {seed}: {p}");
    let mut r = SelftestReport { models: 1, ..Default::default() };

    let (n, problems) = compare_with_observer(&s, &theta, &window, cfg)?;
    r.observations = n;
    r.estimate_failures.extend(problems.into_iter().map(tag));

    let (n, problems) = check_minterms(&s, &theta, &window, cfg)?;
    r.minterm_groups = n;
    r.minterm_failures.extend(problems.into_iter().map(tag));

    let (n, problems) = check_reversal_counted(&s, &window.domain, max_units.min(2))?;
    r.reversed_runs = n;
    r.reversal_failures.extend(problems.into_iter().map(tag));

    for property in [Property::CurrentState, Property::InitialState, Property::InfiniteStep] {
        let q = random_query(&s, property, theta.clone(), seed);
        let v = match property {
            Property::CurrentState => check_current_state(&s, &q, cfg)?,
            Property::InitialState => check_initial_state(&s, &q, cfg)?,
            Property::InfiniteStep => check_infinite_step(&s, &q, cfg)?,
        };
        let o = oracle_check(&s, &q, &window)?;
        r.verdicts += 1;
        if o.violated && v.opaque {
            r.verdict_failures.push(tag(format!("{property}: oracle violation {:?} but verifier says opaque", o.observation)));
        }
        if property == Property::InitialState {
            let cq = OpacityQuery { property: Property::CurrentState, ..q.clone() };
            let rv = check_current_state(&s.reverse(), &cq, cfg)?;
            r.verdicts += 1;
            if rv.opaque != v.opaque {
                r.identity_failures.push(tag("initial-state verdict differs from reverse current-state verdict".into()));
            }
        }
        if property == Property::InfiniteStep && v.opaque {
            let cq = OpacityQuery { property: Property::CurrentState, ..q.clone() };
            r.verdicts += 1;
            if !check_current_state(&s, &cq, cfg)?.opaque {
                r.verdict_failures.push(tag("infinite-step opaque but not current-state opaque".into()));
            }
        }
    }
    Ok(r)
}

/// Runs `count` random models derived from `seed` through the observer, the
/// verifiers and the oracle, in parallel.
pub fn selftest(seed: u64, count: usize, max_units: usize, cfg: &SolverConfig) -> Result<SelftestReport> {
    let parts: Vec<Result<SelftestReport>> =
        (0..count as u64).into_par_iter().map(|i| selftest_model(model_seed(seed, i), max_units, cfg)).collect();
    let mut total = SelftestReport::default();
    for p in parts {
        total.merge(p?);
    }
    Ok(total)
}

/// Reversal against the reverse model over `window`: every transition's
/// accepted tuples, read backwards, are exactly those of its reversed
/// counterpart, and every run of at most `max_events` events (from any
/// state, in either model) read backwards is a run of the other model
/// between the same end states. Returns mismatch descriptions.
pub fn check_reversal(s: &EpEfa, window: &DomainSpec, max_events: usize) -> Result<Vec<String>> {
    Ok(check_reversal_counted(s, window, max_events)?.1)
}

fn backwards(u: &[Event]) -> Vec<Event> {
    u.iter().rev().map(|e| Event::new(&e.tag, e.params.iter().rev().cloned().collect())).collect()
}

fn check_reversal_counted(s: &EpEfa, window: &DomainSpec, max_events: usize) -> Result<(usize, Vec<String>)> {
    let r = s.reverse();
    let mut n = 0;
    let mut problems = Vec::new();
    let fwd = s.concrete_moves(window)?;
    let bwd = r.concrete_moves(window)?;
    for (ti, (a, b)) in fwd.per_transition.iter().zip(&bwd.per_transition).enumerate() {
        let a: BTreeSet<Unit> = a.iter().map(|u| u.iter().rev().cloned().collect()).collect();
        let b: BTreeSet<Unit> = b.iter().cloned().collect();
        if a != b {
            problems.push(format!("transition {}: reversed tuples differ", s.transitions[ti].id));
        }
    }
    for (m, other) in [(s, &r), (&r, s)] {
        for q0 in 0..m.states.len() {
            let from = m.with_initial_set(StateSet::from([q0]));
            for run in from.enumerate_language(max_events, window, crate::model::DEFAULT_RUN_CAP)? {
                n += 1;
                if !other.run(&StateSet::from([run.state]), &backwards(&run.string))?.contains(&q0) {
                    let d = DataString::of(&run.string);
                    problems.push(format!("{} -> {}: {:?} not accepted backwards", m.states[q0], m.states[run.state], d.0));
                }
            }
        }
    }
    Ok((n, problems))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn theta() -> ObservationSpec {
        ObservationSpec::parse("(>= x1 5)").unwrap()
    }

    fn window(units: usize) -> OracleWindow {
        OracleWindow::new(DomainSpec::bounded(0, 9, 1), units).unwrap()
    }

    #[test]
    fn five_state_estimates() {
        let s = fixtures::five_state();
        let est = oracle_estimates(&s, &theta(), &window(1)).unwrap();
        assert!(est[&Observation::empty()].is_superset(&s.state_set(&["q0", "q1"]).unwrap()));
        assert_eq!(est[&Observation::scalar(&[&[5]])], s.state_set(&["q2"]).unwrap());
    }

    #[test]
    fn empty_model_estimates_initial_states() {
        let s = EpEfa::new(DomainSpec::bounded(0, 3, 1)).with_states(["a", "b"]).with_initial(["a"]);
        let est = oracle_estimates(&s, &theta(), &OracleWindow::new(DomainSpec::bounded(0, 3, 1), 2).unwrap()).unwrap();
        assert_eq!(est.len(), 1);
        assert_eq!(est[&Observation::empty()], StateSet::from([0]));
    }

    #[test]
    fn five_state_cso_violation_with_run() {
        let s = fixtures::five_state();
        let q = OpacityQuery::named(&s, Property::CurrentState, &["q2"], &["q0", "q1", "q3", "q4"], theta()).unwrap();
        let v = oracle_cso(&s, &q, &window(2)).unwrap();
        assert!(v.violated);
        assert_eq!(v.observation, Some(Observation::scalar(&[&[5]])));
        let run = v.secret_run.unwrap();
        assert_eq!(run.len(), 2);
        assert_eq!(run[1].params, vec![vec![4], vec![5]]);
        assert_eq!(s.run(&s.initial, &run).unwrap(), s.state_set(&["q2"]).unwrap());
    }

    #[test]
    fn empty_secret_never_violates() {
        let s = fixtures::five_state();
        for p in [Property::CurrentState, Property::InfiniteStep] {
            let q = OpacityQuery::named(&s, p, &[], &[], theta()).unwrap();
            assert!(!oracle_check(&s, &q, &window(2)).unwrap().violated);
        }
    }

    #[test]
    fn five_state_inf_clean_and_violated() {
        let s = fixtures::five_state();
        let q = OpacityQuery::named(&s, Property::InfiniteStep, &["q3"], &["q4"], theta()).unwrap();
        assert!(!oracle_inf(&s, &q, &window(3)).unwrap().violated);
        let q = OpacityQuery::named(&s, Property::InfiniteStep, &["q2"], &["q3"], theta()).unwrap();
        assert!(oracle_inf(&s, &q, &window(3)).unwrap().violated);
    }

    #[test]
    fn five_state_iso() {
        let s = fixtures::five_state_three_initial();
        let q = OpacityQuery::named(&s, Property::InitialState, &["q2"], &["q0", "q1"], theta()).unwrap();
        assert!(!oracle_iso(&s, &q, &window(3)).unwrap().violated);
        let q = OpacityQuery::named(&s, Property::InitialState, &["q2"], &[], theta()).unwrap();
        assert!(oracle_iso(&s, &q, &window(3)).unwrap().violated);
    }

    #[test]
    fn random_models_are_reproducible_and_small() {
        for seed in 0..50 {
            let s = random_model(seed);
            assert_eq!(s, random_model(seed));
            assert!(s.states.len() <= 4 && s.transitions.len() <= 6 && s.step_length() <= 2);
            assert!(s.validate().is_empty(), "{:?}", s.validate());
        }
    }

    #[test]
    fn small_selftest_agrees() {
        let r = selftest(7, 12, 2, &SolverConfig::enumerate(40)).unwrap();
        assert_eq!(r.models, 12);
        assert!(r.agree(), "{r}");
        assert!(r.observations > 12 && r.minterm_groups > 0 && r.reversed_runs > 0);
    }

    #[test]
    fn reversal_holds_on_five_state() {
        let s = fixtures::five_state();
        assert!(check_reversal(&s, &DomainSpec::bounded(0, 9, 1), 2).unwrap().is_empty());
    }
}
