//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! numbers. Runs as a plain binary (`harness = false`) so the lines appear in
//! order; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use pdes_opacity::algebra::{denotation, parse_predicate, DomainSpec, Predicate, SolverConfig, VarStyle};
use pdes_opacity::efa::{bounded_reach, embed_ep_efa, encode_2cm, flatten_step_length, run_2cm, ConregistrationCm, Program, RunStatus};
use pdes_opacity::fixtures;
use pdes_opacity::model::{EpEfa, ObservationSpec, StateSet};
use pdes_opacity::observer::{build_observer, build_observer_with, ObserverLimits};
use pdes_opacity::opacity::{check_current_state, check_infinite_step, check_initial_state, OpacityQuery, Property};
use pdes_opacity::oracle::{model_seed, random_model, selftest, SelftestReport};
use pdes_opacity::Error;

// Pinned thresholds.
const EXAMPLE_BUDGET: Duration = Duration::from_secs(1);
const TWO_COUNTER_BUDGET: Duration = Duration::from_secs(5);
const CORPUS_SEED: u64 = 2024;
const CORPUS_SIZE: usize = 200;
const MAX_UNITS: usize = 3;
const DENOTATION_WINDOW: (i64, i64) = (0, 40);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn theta() -> ObservationSpec {
    ObservationSpec::parse("(>= x1 5)").unwrap()
}

fn cfg() -> SolverConfig {
    SolverConfig::enumerate(40)
}

fn same(a: &Predicate, b: &str, k: usize) -> bool {
    let b = parse_predicate(b, VarStyle::Plain).unwrap();
    let d = DomainSpec::bounded(DENOTATION_WINDOW.0, DENOTATION_WINDOW.1, 1);
    denotation(a, k, &d).unwrap() == denotation(&b, k, &d).unwrap()
}

fn sets(s: &EpEfa, groups: &[&[&str]]) -> Vec<StateSet> {
    let mut v: Vec<StateSet> = groups.iter().map(|g| s.state_set(g).unwrap()).collect();
    v.sort();
    v
}

fn worked_observer() -> Outcome {
    let t = Instant::now();
    let s = fixtures::five_state();
    let obs = build_observer(&s, &theta(), &cfg()).unwrap();
    let mut got = obs.states.clone();
    got.sort();
    let want = sets(&s, &[&["q0", "q1"], &["q2"], &["q3", "q4"], &["q2", "q3", "q4"], &["q4"], &["q2", "q4"]]);
    let states_ok = got == want;

    // (source, k, label, target) as printed.
    let edges: [(&[&str], usize, &str, &[&str]); 9] = [
        (&["q0", "q1"], 1, "(= x1 5)", &["q2"]),
        (&["q0", "q1"], 1, "(> x1 5)", &["q3", "q4"]),
        (&["q0", "q1"], 2, "(and (>= x1 5) (>= x2 5) (= x2 (+ x1 1)))", &["q2", "q3", "q4"]),
        (&["q0", "q1"], 2, "(and (>= x1 5) (>= x2 5) (distinct x2 (+ x1 1)))", &["q3", "q4"]),
        (&["q3", "q4"], 1, "(>= x1 5)", &["q4"]),
        (&["q2", "q3", "q4"], 1, "(>= x1 5)", &["q2", "q4"]),
        (&["q2"], 1, "(>= x1 5)", &["q2"]),
        (&["q4"], 1, "(>= x1 5)", &["q4"]),
        (&["q2", "q4"], 1, "(>= x1 5)", &["q2", "q4"]),
    ];
    let mut matched = vec![false; obs.edges.len()];
    let mut edge_hits = 0;
    for (src, k, label, tgt) in edges {
        let (src, tgt) = (s.state_set(src).unwrap(), s.state_set(tgt).unwrap());
        let hit = obs.edges.iter().enumerate().position(|(i, e)| {
            !matched[i] && obs.states[e.source] == src && obs.states[e.target] == tgt && e.step == k && same(&e.guard, label, k)
        });
        if let Some(i) = hit {
            matched[i] = true;
            edge_hits += 1;
        }
    }
    let edges_ok = edge_hits == 9 && obs.edges.len() == 9;

    let q = OpacityQuery::named(&s, Property::CurrentState, &["q2"], &["q0", "q1", "q3", "q4"], theta()).unwrap();
    let v = check_current_state(&s, &q, &cfg()).unwrap();
    let witness_ok = !v.opaque && v.witness.as_ref().map(|w| w.state == ["q2"]) == Some(true);
    let el = t.elapsed();
    outcome(
        states_ok && edges_ok && witness_ok && el < EXAMPLE_BUDGET,
        format!(
            "{} states, {edge_hits}/9 edges matched on [0:40] ({} built), cso {} witness {:?}, {el:.2?}",
            obs.states.len(),
            obs.edges.len(),
            if v.opaque { "opaque" } else { "not opaque" },
            v.witness.map(|w| w.state)
        ),
    )
}

fn reverse_observer() -> Outcome {
    let t = Instant::now();
    let s = fixtures::five_state_three_initial();
    let rev = build_observer(&s.reverse(), &theta(), &cfg()).unwrap();
    let mut got = rev.states.clone();
    got.sort();
    let want = sets(&s, &[&["q0", "q1", "q2", "q3", "q4"], &["q0", "q2", "q3", "q4"], &["q0", "q1"], &["q0"]]);
    let q = OpacityQuery::named(&s, Property::InitialState, &["q2"], &["q0", "q1"], theta()).unwrap();
    let v = check_initial_state(&s, &q, &cfg()).unwrap();
    let el = t.elapsed();
    outcome(
        got == want && v.opaque && el < EXAMPLE_BUDGET,
        format!("reverse observer {} states (sets match: {}), iso opaque: {}, {el:.2?}", got.len(), got == want, v.opaque),
    )
}

fn infinite_step() -> Outcome {
    let t = Instant::now();
    let s = fixtures::five_state();
    let q = OpacityQuery::named(&s, Property::InfiniteStep, &["q3"], &["q4"], theta()).unwrap();
    let v = check_infinite_step(&s, &q, &cfg()).unwrap();
    let el = t.elapsed();
    outcome(v.opaque && el < EXAMPLE_BUDGET, format!("inf opaque: {}, {el:.2?}", v.opaque))
}

fn oracle_equivalence(r: &SelftestReport) -> Outcome {
    outcome(
        r.models >= CORPUS_SIZE && r.estimate_failures.is_empty(),
        format!(
            "{} models, {} observations of <= {MAX_UNITS} units, {} disagreements{}",
            r.models,
            r.observations,
            r.estimate_failures.len(),
            r.estimate_failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn minterms(r: &SelftestReport) -> Outcome {
    outcome(
        r.minterm_failures.is_empty() && r.minterm_groups > 0,
        format!("{} (state, k) groups, {} problems", r.minterm_groups, r.minterm_failures.len()),
    )
}

fn reversal_identity(r: &SelftestReport) -> Outcome {
    outcome(
        r.identity_failures.is_empty() && r.reversal_failures.is_empty() && r.reversed_runs > 0,
        format!(
            "{} iso/reverse-cso mismatches, {} reversed runs with {} failures; verdict soundness problems: {}",
            r.identity_failures.len(),
            r.reversed_runs,
            r.reversal_failures.len(),
            r.verdict_failures.len()
        ),
    )
}

fn languages() -> Outcome {
    let t = Instant::now();
    let small = DomainSpec::bounded(0, 3, 1);
    let mut problems = Vec::new();

    // Fixtures: 3 units of the 3-step EP-EFA are 9 flat values.
    let registration = fixtures::registration();
    let (_, m2) = registration.flat_data_languages(9, &small).unwrap();
    let (_, m1) = fixtures::registration_efa().flat_data_languages(9, &small).unwrap();
    let e2 = embed_ep_efa(&registration);
    let (all_e, me) = e2.flat_data_languages(9, &small).unwrap();
    let (all_s, _) = registration.flat_data_languages(9, &small).unwrap();
    let (_, mf) = flatten_step_length(&e2).flat_data_languages(9, &small).unwrap();
    if m1 != m2 {
        problems.push("registration_efa vs registration".to_string());
    }
    if me != m2 || all_e != all_s {
        problems.push("embed(registration)".to_string());
    }
    if mf != m2 {
        problems.push("flatten(embed(registration))".to_string());
    }
    let (_, mf1) = flatten_step_length(&fixtures::registration_efa()).flat_data_languages(9, &small).unwrap();
    if mf1 != m1 {
        problems.push("flatten(registration_efa)".to_string());
    }

    // Corpus: 3 units of step length <= 2.
    let mut compared = 0;
    for i in 0..CORPUS_SIZE as u64 {
        let s = random_model(model_seed(CORPUS_SEED, i));
        let (all, marked) = s.flat_data_languages(6, &small).unwrap();
        let e = embed_ep_efa(&s);
        let (all_e, marked_e) = e.flat_data_languages(6, &small).unwrap();
        let (_, marked_f) = flatten_step_length(&e).flat_data_languages(6, &small).unwrap();
        if all_e != all || marked_e != marked {
            problems.push(format!("embed, model {i}"));
        }
        if marked_f != marked {
            problems.push(format!("flatten, model {i}"));
        }
        compared += 1;
    }
    outcome(
        problems.is_empty(),
        format!("fixtures: {} marked strings; corpus: {compared} models; mismatches: {problems:?}; {:.2?}", m2.len(), t.elapsed()),
    )
}

fn two_counter() -> Outcome {
    let programs = [
        "INC r1",
        "JZ r1 1",
        "INC r2\nINC r2\nINC r2\nINC r1\nDEC r2\nJZ r2 8\nJZ r1 4",
        "DEC r1",
        "INC r1\nDEC r1",
        "JZ r2 3\nINC r1\nINC r2",
        "INC r1\nJZ r1 1",
        "INC r1\nINC r1\nDEC r1\nJZ r1 5\nJZ r2 3",
        "INC r1\nJZ r2 1",
        "INC r1\nINC r2\nDEC r1\nDEC r2\nJZ r1 6",
        "JZ r1 2\nJZ r2 1",
    ];
    let mut checks = 0;
    let mut problems = Vec::new();
    let mut slowest = Duration::ZERO;
    let (mut halting, mut other) = (0, 0);
    for src in programs {
        let p: Program = src.parse().unwrap();
        let trace = run_2cm(&p, ConregistrationCm::start(), 20);
        let halt = match trace.status {
            RunStatus::Halted(n) => {
                halting += 1;
                Some(n)
            }
            _ => {
                other += 1;
                None
            }
        };
        let bound = trace.max_value().max(p.len() as i64 + 1);
        let cfg = SolverConfig::enumerate(bound);
        let e = encode_2cm(&p, None);
        let q3 = e.state_set(&["q3"]).unwrap();
        let last = halt.unwrap_or(6);
        for n in 0..=last {
            let t = Instant::now();
            let reach = bounded_reach(&e, &q3, 2 * n + 1, &cfg).unwrap().reachable;
            let el = t.elapsed();
            slowest = slowest.max(el);
            checks += 1;
            let halted = halt.is_some_and(|h| h <= n);
            if reach != halted || el >= TWO_COUNTER_BUDGET {
                problems.push(format!("{:?} n={n}: interpreter {halted}, reach {reach}, {el:.2?}", src.replace('\n', "; ")));
            }
        }
    }
    outcome(
        problems.is_empty() && programs.len() >= 10,
        format!(
            "{} programs ({halting} halting, {other} not), {checks} depth checks, slowest {slowest:.2?}, mismatches: {problems:?}",
            programs.len()
        ),
    )
}

/// Twelve states in a chain that remembers which of the last eleven values
/// were small: the observer needs 2^11 estimates.
fn blowup_model() -> EpEfa {
    let names: Vec<String> = (0..12).map(|i| format!("q{i}")).collect();
    let mut s = EpEfa::new(DomainSpec::naturals(1)).with_states(names.iter().map(String::as_str)).with_initial(["q0"]);
    let small = parse_predicate("(< x1 4)", VarStyle::Plain).unwrap();
    s.push_transition("a0", "q0", "a", 1, small.clone(), "q0");
    s.push_transition("b0", "q0", "b", 1, small.clone().not(), "q0");
    s.push_transition("a1", "q0", "a", 1, small, "q1");
    for i in 1..11 {
        s.push_transition(&format!("n{i}"), &names[i], "c", 1, Predicate::True, &names[i + 1]);
    }
    s
}

fn explosion_guard() -> Outcome {
    let t = Instant::now();
    let s = blowup_model();
    let everything = ObservationSpec::everything();
    let full = build_observer(&s, &everything, &cfg()).unwrap();
    let within_bound = full.states.len() <= 1 << s.states.len();
    let capped = ObserverLimits { max_states: 1_000, ..Default::default() };
    let state_guard = matches!(build_observer_with(&s, &everything, &cfg(), &capped), Err(Error::ExplosionGuard { .. }));
    let few = ObserverLimits { max_sat_checks: full.sat_checks / 2, ..Default::default() };
    let check_guard = matches!(build_observer_with(&s, &everything, &cfg(), &few), Err(Error::ExplosionGuard { .. }));
    // Bounded reachability answers only for the requested depth.
    let p: Program = "JZ r1 1".parse().unwrap();
    let e = encode_2cm(&p, None);
    let r = bounded_reach(&e, &e.state_set(&["q3"]).unwrap(), 9, &SolverConfig::enumerate(3)).unwrap();
    let bounded_only = !r.reachable && r.depth == 9;
    outcome(
        within_bound && state_guard && check_guard && bounded_only,
        format!(
            "12-state model: {} observer states (<= 2^12: {within_bound}), {} sat checks; state cap 1000 trips: {state_guard}; check cap {} trips: {check_guard}; bounded reach reports depth {}; {:.2?}",
            full.states.len(),
            full.sat_checks,
            full.sat_checks / 2,
            r.depth,
            t.elapsed()
        ),
    )
}

fn main() {
    let t = Instant::now();
    let corpus = selftest(CORPUS_SEED, CORPUS_SIZE, MAX_UNITS, &SolverConfig::enumerate(64)).expect("corpus run");
    let corpus_time = t.elapsed();
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("1 observer and current-state verdict of the worked example", Box::new(worked_observer)),
        ("2 reverse observer and initial-state verdict", Box::new(reverse_observer)),
        ("3 infinite-step verdict", Box::new(infinite_step)),
        ("4 observer/oracle estimate equivalence", Box::new(|| oracle_equivalence(&corpus))),
        ("5 minterm disjointness and completeness", Box::new(|| minterms(&corpus))),
        ("6 initial-state / reversed current-state identity and reversal", Box::new(|| reversal_identity(&corpus))),
        ("7 embed and flatten preserve flat data languages", Box::new(languages)),
        ("8 two-counter halting vs bounded reachability", Box::new(two_counter)),
        ("9 explosion guard and bounded-only reachability", Box::new(explosion_guard)),
    ];
    println!("corpus: seed {CORPUS_SEED}, {CORPUS_SIZE} models, {corpus_time:.2?}");
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} [{name}] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
