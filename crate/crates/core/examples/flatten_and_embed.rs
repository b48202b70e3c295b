//! Embedding an EP-EFA into an EFA and flattening step length to one, with
//! the flat marked data languages compared on a small window.

use pdes_opacity::algebra::DomainSpec;
use pdes_opacity::efa::{embed_ep_efa, flatten_step_length};
use pdes_opacity::fixtures;

fn main() -> pdes_opacity::Result<()> {
    let s = fixtures::registration();
    let e = embed_ep_efa(&s);
    let f = flatten_step_length(&e);
    println!(
        "{} states / step length {}  ->  {} states / step length {}",
        e.states.len(),
        e.step_length(),
        f.states.len(),
        f.step_length()
    );

    let window = DomainSpec::bounded(0, 3, 1);
    let (_, marked_s) = s.flat_data_languages(6, &window)?;
    let (_, marked_f) = f.flat_data_languages(6, &window)?;
    let (_, marked_1) = fixtures::registration_efa().flat_data_languages(6, &window)?;
    println!("marked flat strings up to length 6 over [0:3]: {}", marked_s.len());
    println!("flatten preserves them: {}", marked_s == marked_f);
    println!("the one-step EFA with a memory parameter accepts the same: {}", marked_s == marked_1);
    for w in marked_s.iter().take(5) {
        println!("  {w:?}");
    }
    println!("\n{}", f.to_json());
    Ok(())
}
