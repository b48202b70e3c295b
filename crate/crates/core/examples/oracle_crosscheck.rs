//! Cross-checks the symbolic observer and the verifiers against brute-force
//! enumeration on seeded random models.
//!
//!     cargo run --release --example oracle_crosscheck -- [seed] [models] [units]

use pdes_opacity::algebra::SolverConfig;
use pdes_opacity::oracle::selftest;

fn main() -> pdes_opacity::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let seed = args.first().copied().unwrap_or(1);
    let models = args.get(1).copied().unwrap_or(50) as usize;
    let units = args.get(2).copied().unwrap_or(3) as usize;
    let t = std::time::Instant::now();
    let report = selftest(seed, models, units, &SolverConfig::enumerate(64))?;
    println!("{report}");
    println!("elapsed: {:.2?}", t.elapsed());
    if !report.agree() {
        std::process::exit(1);
    }
    Ok(())
}
