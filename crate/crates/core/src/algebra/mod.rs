//! Effective Boolean algebra over integer-vector parameters.
//!
//! Predicates are linear-integer-arithmetic formulas whose variables are
//! indexed parameter slots `x<i>` (1-based). A slot holds one domain element,
//! which is a vector of `width` integers; `x<i>.<j>` addresses component `j`.
//! Existential quantifiers bind a whole slot.
//!
//! Satisfiability is decided by [`Solver`], either by exhaustive enumeration
//! (exact on bounded domains) or by an external SMT-LIB 2 solver.

mod domain;
mod eval;
mod ops;
mod sexpr;
mod smtlib;
mod solver;

pub use domain::{DomainKind, DomainSpec, Signature};
pub use eval::{denotation, denotation_in, Evaluator};
pub use ops::{exists_project, rename, reverse_predicate};
pub use sexpr::{parse_predicate, parse_term, VarStyle};
pub use smtlib::{script_for, SmtSession};
pub use solver::{is_sat, is_sat_in, Backend, SatResult, Solver, SolverConfig, SOLVER_ENV};

pub(crate) use eval::for_each_tuple;
pub(crate) use ops::{compact, shift_slots, substitute, substitute_term};

use std::collections::BTreeSet;
use std::fmt;

/// A reference to component `comp` of parameter slot `param` (both 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub param: usize,
    pub comp: usize,
}

/// Integer-valued terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(i64),
    Sum(Box<Term>, Box<Term>),
    Diff(Box<Term>, Box<Term>),
    Scale(i64, Box<Term>),
    /// `cond ? then : else`; the condition must be quantifier-free.
    Ite(Box<Predicate>, Box<Term>, Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "distinct",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }
}

/// Quantifier-bearing predicate AST.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    True,
    False,
    Atom(Term, Rel, Term),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    /// Binds parameter slot `.0` inside the body.
    Exists(usize, Box<Predicate>),
}

impl Term {
    /// Component 1 of slot `param`.
    pub fn var(param: usize) -> Term {
        Term::Var(Var { param, comp: 1 })
    }

    pub fn comp(param: usize, comp: usize) -> Term {
        Term::Var(Var { param, comp })
    }

    pub fn c(v: i64) -> Term {
        Term::Const(v)
    }

    pub fn scale(k: i64, t: Term) -> Term {
        Term::Scale(k, Box::new(t))
    }

    pub fn ite(cond: Predicate, then: Term, other: Term) -> Term {
        Term::Ite(Box::new(cond), Box::new(then), Box::new(other))
    }

    pub fn rel(self, rel: Rel, rhs: Term) -> Predicate {
        Predicate::Atom(self, rel, rhs)
    }

    pub fn equals(self, rhs: Term) -> Predicate {
        self.rel(Rel::Eq, rhs)
    }

    pub fn differs(self, rhs: Term) -> Predicate {
        self.rel(Rel::Ne, rhs)
    }

    pub fn lt(self, rhs: Term) -> Predicate {
        self.rel(Rel::Lt, rhs)
    }

    pub fn le(self, rhs: Term) -> Predicate {
        self.rel(Rel::Le, rhs)
    }

    pub fn gt(self, rhs: Term) -> Predicate {
        self.rel(Rel::Gt, rhs)
    }

    pub fn ge(self, rhs: Term) -> Predicate {
        self.rel(Rel::Ge, rhs)
    }

    fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Term::Var(v) => f(*v),
            Term::Const(_) => {}
            Term::Sum(a, b) | Term::Diff(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Term::Scale(_, t) => t.visit_vars(f),
            Term::Ite(c, a, b) => {
                c.visit_all_vars(f);
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }
}

impl std::ops::Add for Term {
    type Output = Term;
    fn add(self, rhs: Term) -> Term {
        Term::Sum(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Term {
    type Output = Term;
    fn sub(self, rhs: Term) -> Term {
        Term::Diff(Box::new(self), Box::new(rhs))
    }
}

impl Predicate {
    pub fn and(self, rhs: Predicate) -> Predicate {
        Predicate::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Predicate) -> Predicate {
        Predicate::Or(Box::new(self), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Predicate {
        Predicate::Not(Box::new(self))
    }

    pub fn exists(slot: usize, body: Predicate) -> Predicate {
        Predicate::Exists(slot, Box::new(body))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn conj<I: IntoIterator<Item = Predicate>>(items: I) -> Predicate {
        let mut it = items.into_iter();
        match it.next() {
            None => Predicate::True,
            Some(first) => it.fold(first, Predicate::and),
        }
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn disj<I: IntoIterator<Item = Predicate>>(items: I) -> Predicate {
        let mut it = items.into_iter();
        match it.next() {
            None => Predicate::False,
            Some(first) => it.fold(first, Predicate::or),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Predicate::True | Predicate::False | Predicate::Atom(..) => true,
            Predicate::Not(p) => p.is_quantifier_free(),
            Predicate::And(a, b) | Predicate::Or(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Predicate::Exists(..) => false,
        }
    }

    /// Parameter slots occurring free.
    pub fn free_params(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut |v| {
            out.insert(v.param);
        });
        out
    }

    /// Free variable occurrences (slot and component).
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut |v| {
            out.insert(v);
        });
        out
    }

    /// Largest slot index mentioned anywhere, bound or free.
    pub fn max_slot(&self) -> usize {
        let mut m = 0;
        self.visit_all_vars(&mut |v| m = m.max(v.param));
        self.visit_binders(&mut |b| m = m.max(b));
        m
    }

    /// Largest component index mentioned anywhere.
    pub fn max_component(&self) -> usize {
        let mut m = 0;
        self.visit_all_vars(&mut |v| m = m.max(v.comp));
        m
    }

    fn visit_all_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Predicate::True | Predicate::False => {}
            Predicate::Atom(a, _, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Predicate::Not(p) | Predicate::Exists(_, p) => p.visit_all_vars(f),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.visit_all_vars(f);
                b.visit_all_vars(f);
            }
        }
    }

    fn visit_binders(&self, f: &mut impl FnMut(usize)) {
        match self {
            Predicate::True | Predicate::False | Predicate::Atom(..) => {}
            Predicate::Not(p) => p.visit_binders(f),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.visit_binders(f);
                b.visit_binders(f);
            }
            Predicate::Exists(s, p) => {
                f(*s);
                p.visit_binders(f);
            }
        }
    }

    fn collect_free(&self, bound: &mut Vec<usize>, f: &mut impl FnMut(Var)) {
        match self {
            Predicate::True | Predicate::False => {}
            Predicate::Atom(a, _, b) => {
                let mut g = |v: Var| {
                    if !bound.contains(&v.param) {
                        f(v)
                    }
                };
                a.visit_vars(&mut g);
                b.visit_vars(&mut g);
            }
            Predicate::Not(p) => p.collect_free(bound, f),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.collect_free(bound, f);
                b.collect_free(bound, f);
            }
            Predicate::Exists(s, p) => {
                bound.push(*s);
                p.collect_free(bound, f);
                bound.pop();
            }
        }
    }

    /// Checks that free slots lie in `[1:arity]`, components in
    /// `[1:width]`, and that if-then-else conditions are quantifier-free.
    pub fn check_well_formed(&self, sig: &Signature) -> crate::Result<()> {
        for v in self.free_vars() {
            if v.param == 0 || v.param > sig.arity() {
                return Err(crate::Error::MalformedPredicate(format!("free variable x{} outside arity {}", v.param, sig.arity())));
            }
        }
        let mut err = None;
        self.visit_all_vars(&mut |v| {
            if v.comp == 0 || v.comp > sig.slot(v.param).width {
                err.get_or_insert_with(|| format!("component {} of x{} exceeds width {}", v.comp, v.param, sig.slot(v.param).width));
            }
        });
        if let Some(msg) = err {
            return Err(crate::Error::MalformedPredicate(msg));
        }
        if !self.ite_conditions_quantifier_free() {
            return Err(crate::Error::MalformedPredicate("if-then-else condition contains a quantifier".into()));
        }
        Ok(())
    }

    fn ite_conditions_quantifier_free(&self) -> bool {
        fn term_ok(t: &Term) -> bool {
            match t {
                Term::Var(_) | Term::Const(_) => true,
                Term::Sum(a, b) | Term::Diff(a, b) => term_ok(a) && term_ok(b),
                Term::Scale(_, t) => term_ok(t),
                Term::Ite(c, a, b) => c.is_quantifier_free() && c.ite_conditions_quantifier_free() && term_ok(a) && term_ok(b),
            }
        }
        match self {
            Predicate::True | Predicate::False => true,
            Predicate::Atom(a, _, b) => term_ok(a) && term_ok(b),
            Predicate::Not(p) | Predicate::Exists(_, p) => p.ite_conditions_quantifier_free(),
            Predicate::And(a, b) | Predicate::Or(a, b) => a.ite_conditions_quantifier_free() && b.ite_conditions_quantifier_free(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sexpr::print_term(self, VarStyle::Plain))
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sexpr::print_predicate(self, VarStyle::Plain))
    }
}

impl Predicate {
    /// Renders with a variable naming scheme (see [`VarStyle`]).
    pub fn to_sexpr(&self, style: VarStyle) -> String {
        sexpr::print_predicate(self, style)
    }
}

impl Term {
    pub fn to_sexpr(&self, style: VarStyle) -> String {
        sexpr::print_term(self, style)
    }
}

impl std::str::FromStr for Predicate {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        parse_predicate(s, VarStyle::Plain)
    }
}
