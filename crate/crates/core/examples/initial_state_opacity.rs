//! Initial-state opacity, decided as current-state opacity of the reverse
//! automaton.

use pdes_opacity::algebra::SolverConfig;
use pdes_opacity::fixtures;
use pdes_opacity::model::ObservationSpec;
use pdes_opacity::observer::build_observer;
use pdes_opacity::opacity::{check_initial_state, OpacityQuery, Property};

fn main() -> pdes_opacity::Result<()> {
    let s = fixtures::five_state_three_initial();
    let theta = ObservationSpec::parse("(>= x1 5)")?;
    let cfg = SolverConfig::default();

    let rev = build_observer(&s.reverse(), &theta, &cfg)?;
    println!("reverse observer: {} states", rev.states.len());
    for i in 0..rev.states.len() {
        println!("  {{{}}}", rev.names(i).join(","));
    }

    let q = OpacityQuery::named(&s, Property::InitialState, &["q2"], &["q0", "q1"], theta.clone())?;
    println!("q2 vs q0,q1: {}", check_initial_state(&s, &q, &cfg)?);

    // Without non-secret initial states nothing can hide a secret start.
    let q = OpacityQuery::named(&s, Property::InitialState, &["q2"], &[], theta)?;
    println!("q2 vs nothing: {}", check_initial_state(&s, &q, &cfg)?);
    Ok(())
}
