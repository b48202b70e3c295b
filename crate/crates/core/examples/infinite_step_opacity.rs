//! Infinite-step opacity: later observations must not reveal that a secret
//! state was visited earlier.

use pdes_opacity::algebra::SolverConfig;
use pdes_opacity::fixtures;
use pdes_opacity::model::ObservationSpec;
use pdes_opacity::opacity::{check_infinite_step, OpacityQuery, Property};

fn main() -> pdes_opacity::Result<()> {
    let s = fixtures::five_state();
    let theta = ObservationSpec::parse("(>= x1 5)")?;
    let cfg = SolverConfig::default();

    let q = OpacityQuery::named(&s, Property::InfiniteStep, &["q3"], &["q4"], theta.clone())?;
    println!("q3 vs q4: {}", check_infinite_step(&s, &q, &cfg)?);

    let q = OpacityQuery::named(&s, Property::InfiniteStep, &["q2"], &["q3"], theta)?;
    let v = check_infinite_step(&s, &q, &cfg)?;
    println!("q2 vs q3: {v}");
    println!("  json: {}", v.to_json());
    Ok(())
}
