use super::eval::for_each_tuple;
use super::{DomainSpec, Evaluator, Predicate, Signature, SmtSession};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Enumerate,
    External,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(Backend::Enumerate),
            "external" => Ok(Backend::External),
            other => Err(Error::InvalidQuery(format!("unknown solver backend '{other}'"))),
        }
    }
}

/// Environment variable consulted for the default external solver command.
pub const SOLVER_ENV: &str = "PDES_SOLVER";

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Truncation used by the enumeration backend on unbounded domains.
    pub enumeration_bound: i64,
    pub solver_command: String,
    pub timeout_ms: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Enumerate,
            enumeration_bound: 40,
            solver_command: std::env::var(SOLVER_ENV).unwrap_or_else(|_| "z3 -in".into()),
            timeout_ms: 10_000,
        }
    }
}

impl SolverConfig {
    pub fn enumerate(bound: i64) -> Self {
        SolverConfig { backend: Backend::Enumerate, enumeration_bound: bound, ..Default::default() }
    }

    pub fn external(command: impl Into<String>) -> Self {
        SolverConfig { backend: Backend::External, solver_command: command.into(), ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatResult {
    pub sat: bool,
    /// False when the answer comes from a truncated enumeration that may
    /// differ from the answer over the full domain.
    pub exact: bool,
    /// A satisfying flat tuple over the free slots, when `sat`.
    pub witness: Option<Vec<i64>>,
}

/// A satisfiability checker owning at most one solver process.
///
/// Not shared across threads; each worker builds its own.
pub struct Solver {
    cfg: SolverConfig,
    session: Option<SmtSession>,
    checks: u64,
}

impl Solver {
    pub fn new(cfg: &SolverConfig) -> Self {
        Solver { cfg: cfg.clone(), session: None, checks: 0 }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Number of satisfiability queries answered so far.
    pub fn checks(&self) -> u64 {
        self.checks
    }

    pub fn check(&mut self, p: &Predicate, sig: &Signature) -> Result<SatResult> {
        p.check_well_formed(sig)?;
        self.checks += 1;
        match self.cfg.backend {
            Backend::Enumerate => enumerate_sat(p, sig, self.cfg.enumeration_bound),
            Backend::External => {
                if self.session.is_none() {
                    self.session = Some(SmtSession::spawn(&self.cfg.solver_command, self.cfg.timeout_ms)?);
                }
                let res = self.session.as_mut().expect("session").check(p, sig);
                if res.is_err() {
                    self.session = None;
                }
                res
            }
        }
    }

    pub fn is_sat(&mut self, p: &Predicate, sig: &Signature) -> Result<bool> {
        Ok(self.check(p, sig)?.sat)
    }
}

fn enumerate_sat(p: &Predicate, sig: &Signature, bound: i64) -> Result<SatResult> {
    if bound < 1 && !sig.all_bounded() {
        return Err(Error::InvalidQuery("enumeration bound must be at least 1".into()));
    }
    let bounded = sig.all_bounded();
    let mut ev = Evaluator::new(sig, Some(bound));
    let mut witness = None;
    for_each_tuple(sig, Some(bound), |t| {
        if ev.holds_on(p, t)? {
            witness = Some(t.to_vec());
            return Ok(false);
        }
        Ok(true)
    })?;
    let sat = witness.is_some();
    Ok(SatResult { sat, exact: bounded || (sat && p.is_quantifier_free()), witness })
}

/// One-shot satisfiability of `φ` over `arity` slots of `domain`.
pub fn is_sat(p: &Predicate, arity: usize, domain: &DomainSpec, cfg: &SolverConfig) -> Result<SatResult> {
    is_sat_in(p, &Signature::uniform(*domain, arity), cfg)
}

pub fn is_sat_in(p: &Predicate, sig: &Signature, cfg: &SolverConfig) -> Result<SatResult> {
    Solver::new(cfg).check(p, sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_predicate, Term as T, VarStyle};

    fn p(s: &str) -> Predicate {
        parse_predicate(s, VarStyle::Plain).unwrap()
    }

    fn z3() -> Option<SolverConfig> {
        let cfg = SolverConfig::external("z3 -in");
        is_sat(&Predicate::True, 1, &DomainSpec::naturals(1), &cfg).ok().map(|_| cfg)
    }

    #[test]
    fn contradiction_is_unsat() {
        let r = is_sat(&p("(and (>= x1 5) (< x1 4))"), 1, &DomainSpec::naturals(1), &SolverConfig::enumerate(40)).unwrap();
        assert!(!r.sat);
        assert!(!r.exact);
    }

    #[test]
    fn projected_guard_is_sat() {
        let q = p("(exists x2 (and (< x2 5) (and (> (+ x1 x2) 9) (>= x1 5))))");
        let r = is_sat(&q, 1, &DomainSpec::naturals(1), &SolverConfig::enumerate(40)).unwrap();
        assert!(r.sat);
        assert_eq!(r.witness, Some(vec![6]));
    }

    #[test]
    fn bounded_witness_is_first_lexicographic() {
        let q = T::var(1).equals(T::var(2) + T::c(1)).and(T::var(1).ge(T::c(5))).and(T::var(2).ge(T::c(5)));
        let r = is_sat(&q, 2, &DomainSpec::bounded(0, 20, 1), &SolverConfig::enumerate(1)).unwrap();
        assert_eq!(r, SatResult { sat: true, exact: true, witness: Some(vec![6, 5]) });
    }

    #[test]
    fn unbound_variable_is_malformed() {
        let r = is_sat(&p("(< x3 1)"), 2, &DomainSpec::bounded(0, 3, 1), &SolverConfig::default());
        assert!(matches!(r, Err(Error::MalformedPredicate(_))));
    }

    #[test]
    fn missing_solver_is_unavailable() {
        let cfg = SolverConfig::external("/nonexistent/solver-binary");
        let r = is_sat(&Predicate::True, 1, &DomainSpec::naturals(1), &cfg);
        assert!(matches!(r, Err(Error::SolverUnavailable(_))));
    }

    #[test]
    fn silent_solver_times_out() {
        let mut cfg = SolverConfig::external("sleep 5");
        cfg.timeout_ms = 200;
        let r = is_sat(&Predicate::True, 1, &DomainSpec::naturals(1), &cfg);
        assert!(matches!(r, Err(Error::SolverTimeout(200))), "{r:?}");
    }

    #[test]
    fn garbage_answer_is_protocol_error() {
        let cfg = SolverConfig::external("echo banana");
        let r = is_sat(&Predicate::True, 1, &DomainSpec::naturals(1), &cfg);
        assert!(matches!(r, Err(Error::SolverProtocol(_))), "{r:?}");
    }

    #[test]
    fn external_agrees_on_unbounded_examples() {
        let Some(cfg) = z3() else {
            eprintln!("z3 not found; skipping");
            return;
        };
        let nat = DomainSpec::naturals(1);
        assert!(!is_sat(&p("(and (>= x1 5) (< x1 4))"), 1, &nat, &cfg).unwrap().sat);
        let q = p("(exists x2 (and (< x2 5) (and (> (+ x1 x2) 9) (>= x1 5))))");
        let r = is_sat(&q, 1, &nat, &cfg).unwrap();
        assert!(r.sat && r.exact);
        let w = r.witness.unwrap();
        assert!(w[0] >= 6);
        // Reusing one session across queries.
        let mut s = Solver::new(&cfg);
        for i in 0..5 {
            let r = s.check(&T::var(1).equals(T::c(i)), &Signature::uniform(nat, 1)).unwrap();
            assert_eq!(r.witness, Some(vec![i]));
        }
        let neg = s.check(&T::var(1).lt(T::c(-3)), &Signature::uniform(DomainSpec::integers(1), 1)).unwrap();
        assert!(neg.witness.unwrap()[0] < -3);
    }
}
