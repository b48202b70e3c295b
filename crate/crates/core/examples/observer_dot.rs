//! Builds the symbolic observer and prints it as Graphviz DOT.
//!
//!     cargo run --example observer_dot | dot -Tsvg > observer.svg

use pdes_opacity::algebra::SolverConfig;
use pdes_opacity::fixtures;
use pdes_opacity::model::{Observation, ObservationSpec};
use pdes_opacity::observer::build_observer;

fn main() -> pdes_opacity::Result<()> {
    let s = fixtures::five_state();
    let theta = ObservationSpec::parse("(>= x1 5)")?;
    let obs = build_observer(&s, &theta, &SolverConfig::default())?;
    print!("{}", obs.to_dot());

    eprintln!("{} states, {} edges, {} satisfiability checks", obs.states.len(), obs.edges.len(), obs.sat_checks);
    for w in [Observation::empty(), Observation::scalar(&[&[5]]), Observation::scalar(&[&[6, 7]]), Observation::scalar(&[&[4]])] {
        match obs.estimate(&w)? {
            Some(e) => eprintln!("Est({w}) = {:?}", s.names(e)),
            None => eprintln!("Est({w}) = ⊥"),
        }
    }
    Ok(())
}
