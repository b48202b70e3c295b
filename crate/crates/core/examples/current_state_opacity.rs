//! Current-state opacity on a small EP-EFA with partially observable
//! parameters: the intruder only sees values of at least 5.

use pdes_opacity::algebra::SolverConfig;
use pdes_opacity::fixtures;
use pdes_opacity::model::ObservationSpec;
use pdes_opacity::opacity::{check_current_state, OpacityQuery, Property};

fn main() -> pdes_opacity::Result<()> {
    let s = fixtures::five_state();
    let theta = ObservationSpec::parse("(>= x1 5)")?;
    let cfg = SolverConfig::default();

    for (secret, nonsecret) in [(&["q2"][..], &["q0", "q1", "q3", "q4"][..]), (&["q3"], &["q4"])] {
        let q = OpacityQuery::named(&s, Property::CurrentState, secret, nonsecret, theta.clone())?;
        let v = check_current_state(&s, &q, &cfg)?;
        println!("secret {secret:?} vs {nonsecret:?}: {v}");
        println!("  json: {}", v.to_json());
    }
    Ok(())
}
