//! Reference models used by the examples, the tests and the CLI.

use crate::algebra::DomainSpec;
use crate::efa::Efa;
use crate::model::EpEfa;

/// Five-state EP-EFA over ℕ with guards of step length 1 and 2; the running
/// example for the observer and the three opacity notions.
pub fn five_state() -> EpEfa {
    EpEfa::new(DomainSpec::naturals(1))
        .with_states(["q0", "q1", "q2", "q3", "q4"])
        .with_initial(["q0"])
        .with_transition("t1", "q0", "sigma1", 1, "(< x1 4)", "q1")
        .and_then(|m| m.with_transition("t2", "q0", "sigma2", 2, "(> (+ x1 x2) 9)", "q3"))
        .and_then(|m| m.with_transition("t3", "q1", "sigma3", 2, "(and (= x2 (+ x1 1)) (> x1 3))", "q2"))
        .and_then(|m| m.with_transition("t4", "q3", "sigma4", 1, "(< x1 7)", "q4"))
        .and_then(|m| m.with_transition("t5", "q2", "sigma5", 1, "true", "q2"))
        .and_then(|m| m.with_transition("t6", "q4", "sigma6", 1, "true", "q4"))
        .expect("fixture guards parse")
}

/// [`five_state`] with initial states `{q0, q1, q2}`.
pub fn five_state_three_initial() -> EpEfa {
    let m = five_state();
    let init = m.state_set(&["q0", "q1", "q2"]).expect("fixture states");
    m.with_initial_set(init)
}

/// Two-state registration model: one 3-parameter event (name, password,
/// confirmation); a mismatch loops back, a match is accepted.
pub fn registration() -> EpEfa {
    EpEfa::new(DomainSpec::naturals(1))
        .with_states(["q0", "q1"])
        .with_initial(["q0"])
        .with_marked(["q1"])
        .with_transition("t1", "q0", "sigma", 3, "(= x2 x3)", "q1")
        .and_then(|m| m.with_transition("t2", "q0", "sigma", 3, "(distinct x2 x3)", "q0"))
        .expect("fixture guards parse")
}

/// Registration as a full EFA: the first password is stored in the state
/// parameter and compared with the confirmation.
pub fn registration_efa() -> Efa {
    Efa::new(DomainSpec::naturals(1), DomainSpec::naturals(1))
        .with_states(["q0", "q1", "q2", "q3"])
        .with_initial(["q0"])
        .with_marked(["q3"])
        .with_transition("t1", "q0", "sigma1", 1, "true", None, "q1")
        .and_then(|e| e.with_transition("t2", "q1", "sigma2", 1, "true", Some(&["x1"]), "q2"))
        .and_then(|e| e.with_transition("t3", "q2", "sigma3", 1, "(= y1 x1)", None, "q3"))
        .and_then(|e| e.with_transition("t4", "q2", "sigma3", 1, "(distinct y1 x1)", None, "q0"))
        .expect("fixture guards parse")
}

/// EFA over ℕ whose marked flat data strings are the strictly increasing
/// sequences of even, nonzero length.
pub fn increasing_efa() -> Efa {
    Efa::new(DomainSpec::naturals(1), DomainSpec::naturals(1))
        .with_states(["q0", "q1", "q2"])
        .with_initial(["q0"])
        .with_marked(["q2"])
        .with_transition("t1", "q0", "sigma1", 1, "true", Some(&["x1"]), "q1")
        .and_then(|e| e.with_transition("t2", "q1", "sigma2", 1, "(< y1 x1)", Some(&["x1"]), "q2"))
        .and_then(|e| e.with_transition("t3", "q2", "sigma3", 1, "(< y1 x1)", Some(&["x1"]), "q1"))
        .expect("fixture guards parse")
}
