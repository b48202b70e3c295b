//! Two-counter machines, their EFA encoding, and bounded reachability of the
//! halting state compared with the interpreter.

use pdes_opacity::algebra::SolverConfig;
use pdes_opacity::efa::{bounded_reach, encode_2cm, run_2cm, ConregistrationCm, Program, RunStatus};

fn main() -> pdes_opacity::Result<()> {
    let programs = [("inc", "INC r1"), ("spin", "JZ r1 1"), ("count to 3", "INC r2\nINC r2\nINC r2\nINC r1\nDEC r2\nJZ r2 8\nJZ r1 4")];
    for (name, src) in programs {
        let p: Program = src.parse()?;
        let trace = run_2cm(&p, ConregistrationCm::start(), 20);
        let e = encode_2cm(&p, None);
        let q3 = e.state_set(&["q3"])?;
        // Parameters never exceed the interpreter's values.
        let cfg = SolverConfig::enumerate(trace.max_value().max(p.len() as i64 + 1));
        let n = match trace.status {
            RunStatus::Halted(n) => n,
            _ => 6,
        };
        let r = bounded_reach(&e, &q3, 2 * n + 1, &cfg)?;
        println!("{name}: interpreter {:?}, reach at depth {}: {}", trace.status, 2 * n + 1, r.reachable);
        if let Some(w) = r.witness {
            println!("  configurations: {:?}", w.params);
        }
    }
    Ok(())
}
