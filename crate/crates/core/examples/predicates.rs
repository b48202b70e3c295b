//! The predicate algebra: parsing, evaluation, satisfiability, projection
//! and reversal.

use pdes_opacity::algebra::{
    denotation, exists_project, parse_predicate, reverse_predicate, DomainSpec, Signature, Solver, SolverConfig, VarStyle,
};

fn main() -> pdes_opacity::Result<()> {
    let phi = parse_predicate("(and (= x2 (+ x1 1)) (> x1 3))", VarStyle::Plain)?;
    let theta = parse_predicate("(>= x1 5)", VarStyle::Plain)?;
    let d = DomainSpec::bounded(0, 9, 1);
    println!("phi = {phi}");
    println!("models on [0:9]: {:?}", denotation(&phi, 2, &d)?);

    // Only the second parameter observed.
    let seen = exists_project(&phi, 2, &[2], &theta)?;
    println!("second parameter observed: {seen}");

    let rev = reverse_predicate(&phi, 2);
    println!("reversed: {rev}");

    let mut solver = Solver::new(&SolverConfig::default());
    let both = phi.clone().and(parse_predicate("(< x2 5)", VarStyle::Plain)?);
    let r = solver.check(&both, &Signature::uniform(DomainSpec::naturals(1), 2))?;
    println!("phi and x2 < 5 satisfiable over naturals: {} (witness {:?})", r.sat, r.witness);
    Ok(())
}
