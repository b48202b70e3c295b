use proptest::prelude::*;

use pdes_opacity::algebra::{
    denotation, parse_predicate, reverse_predicate, DomainSpec, Predicate, Rel, Signature, Solver, SolverConfig, Term, VarStyle,
};
use pdes_opacity::model::{Event, Observation, ObservationSpec, StateSet};
use pdes_opacity::opacity::{check_current_state, check_infinite_step, OpacityQuery, Property};
use pdes_opacity::oracle::{check_reversal, random_model, random_theta};

const RELS: [Rel; 6] = [Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge];

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        (1usize..=2).prop_map(Term::var),
        (-3i64..=9).prop_map(Term::c),
        ((1usize..=2), (1usize..=2)).prop_map(|(a, b)| Term::var(a) + Term::var(b)),
        ((1usize..=2), (0i64..=3)).prop_map(|(a, c)| Term::var(a) - Term::c(c)),
    ]
}

fn predicate() -> impl Strategy<Value = Predicate> {
    let atom = (term(), 0usize..6, term()).prop_map(|(a, r, b)| a.rel(RELS[r], b));
    let leaf = prop_oneof![atom, Just(Predicate::True), Just(Predicate::False)];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            inner.clone().prop_map(Predicate::not),
            inner.prop_map(|p| Predicate::exists(3, p.and(Term::var(3).lt(Term::var(1))))),
        ]
    })
}

fn window() -> DomainSpec {
    DomainSpec::bounded(0, 5, 1)
}

fn models(p: &Predicate) -> Vec<Vec<i64>> {
    denotation(p, 2, &window()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sexpr_round_trip(p in predicate()) {
        let back = parse_predicate(&p.to_sexpr(VarStyle::Plain), VarStyle::Plain).unwrap();
        prop_assert_eq!(models(&back), models(&p));
    }

    #[test]
    fn connectives_are_boolean(a in predicate(), b in predicate()) {
        let all = models(&Predicate::True);
        let (ma, mb) = (models(&a), models(&b));
        let and: Vec<_> = all.iter().filter(|t| ma.contains(t) && mb.contains(t)).cloned().collect();
        let or: Vec<_> = all.iter().filter(|t| ma.contains(t) || mb.contains(t)).cloned().collect();
        let not: Vec<_> = all.iter().filter(|t| !ma.contains(t)).cloned().collect();
        prop_assert_eq!(models(&a.clone().and(b.clone())), and);
        prop_assert_eq!(models(&a.clone().or(b)), or);
        prop_assert_eq!(models(&a.not()), not);
    }

    #[test]
    fn sat_agrees_with_denotation(p in predicate()) {
        let mut solver = Solver::new(&SolverConfig::enumerate(5));
        let r = solver.check(&p, &Signature::uniform(window(), 2)).unwrap();
        prop_assert_eq!(r.sat, !models(&p).is_empty());
        if let Some(w) = r.witness {
            prop_assert!(models(&p).contains(&w));
        }
    }

    #[test]
    fn reversal_mirrors_tuples(p in predicate()) {
        let rev = reverse_predicate(&p, 2);
        let mirrored: std::collections::BTreeSet<Vec<i64>> = models(&p).into_iter().map(|mut t| { t.reverse(); t }).collect();
        let got: std::collections::BTreeSet<Vec<i64>> = models(&rev).into_iter().collect();
        prop_assert_eq!(got, mirrored);
        prop_assert_eq!(models(&reverse_predicate(&rev, 2)), models(&p));
    }

    #[test]
    fn observation_reversal_is_an_involution(units in prop::collection::vec(prop::collection::vec(0i64..9, 1..3), 0..4)) {
        let w = Observation::scalar(&units.iter().map(Vec::as_slice).collect::<Vec<_>>());
        prop_assert_eq!(w.reversed().reversed(), w.clone());
        prop_assert_eq!(w.reversed().units(), w.units());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reverse_model_reads_runs_backwards(seed in any::<u64>()) {
        let s = random_model(seed);
        prop_assert!(check_reversal(&s, &DomainSpec::bounded(0, 3, 1), 2).unwrap().is_empty());
        prop_assert_eq!(s.reverse().reverse().transitions.len(), s.transitions.len());
    }

    #[test]
    fn run_distributes_over_start_sets(seed in any::<u64>(), xs in prop::collection::vec(0i64..8, 1..5)) {
        let s = random_model(seed);
        let u: Vec<Event> = s.transitions.iter().zip(&xs).map(|(t, &x)| Event::new(&t.tag, vec![vec![x]; t.k])).collect();
        let all = s.all_states();
        let mut union = StateSet::new();
        for &q in &all {
            union.extend(s.run(&StateSet::from([q]), &u).unwrap());
        }
        prop_assert_eq!(s.run(&all, &u).unwrap(), union);
    }

    #[test]
    fn opacity_is_monotone_and_infinite_step_implies_current_state(seed in any::<u64>(), drop in any::<u64>()) {
        let s = random_model(seed);
        let theta: ObservationSpec = random_theta(seed);
        let cfg = SolverConfig::enumerate(16);
        let n = s.states.len();
        let secret: StateSet = (0..n).filter(|i| (seed >> i) & 1 == 1).collect();
        let nonsecret: StateSet = (0..n).filter(|i| (seed >> (i + 8)) & 1 == 1).collect();
        let q = OpacityQuery::new(Property::CurrentState, secret.clone(), nonsecret.clone(), theta.clone());
        let cso = check_current_state(&s, &q, &cfg).unwrap().opaque;

        // Fewer secrets or more non-secrets never break opacity.
        let smaller: StateSet = secret.iter().copied().filter(|i| (drop >> i) & 1 == 0).collect();
        let larger: StateSet = nonsecret.iter().copied().chain((0..n).filter(|i| (drop >> (i + 8)) & 1 == 1)).collect();
        let q2 = OpacityQuery::new(Property::CurrentState, smaller, larger, theta.clone());
        if cso {
            prop_assert!(check_current_state(&s, &q2, &cfg).unwrap().opaque);
        }

        let qi = OpacityQuery::new(Property::InfiniteStep, secret, nonsecret, theta);
        if check_infinite_step(&s, &qi, &cfg).unwrap().opaque {
            prop_assert!(cso);
        }
    }
}
