//! Bounded reachability in an EFA whose state parameter remembers the last
//! value: the marked state needs a strictly increasing pair.

use pdes_opacity::algebra::SolverConfig;
use pdes_opacity::efa::bounded_reach;
use pdes_opacity::fixtures;

fn main() -> pdes_opacity::Result<()> {
    let e = fixtures::increasing_efa();
    let q2 = e.state_set(&["q2"])?;
    for depth in 1..=3 {
        let r = bounded_reach(&e, &q2, depth, &SolverConfig::enumerate(5))?;
        println!("{r}");
        if let Some(w) = &r.witness {
            println!("  data string: {:?}", w.data_string().flat());
        }
    }
    Ok(())
}
