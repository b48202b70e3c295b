use std::collections::{BTreeMap, BTreeSet};

use super::{Predicate, Term, Var};
use crate::{Error, Result};

/// Capture-avoiding substitution of free variables.
///
/// `f` returns the replacement term for a free variable. A binder whose slot
/// would capture a variable of some replacement is renamed to a fresh slot.
pub(crate) fn substitute(p: &Predicate, f: &dyn Fn(Var) -> Term) -> Predicate {
    let mut fresh = p.max_slot();
    let mut probe = |v: Var| {
        f(v).visit_vars(&mut |w| fresh = fresh.max(w.param));
    };
    p.collect_free(&mut Vec::new(), &mut probe);
    let mut s = Subst { f, fresh: fresh + 1, env: Vec::new() };
    s.pred(p)
}

pub(crate) fn substitute_term(t: &Term, f: &dyn Fn(Var) -> Term) -> Term {
    let mut fresh = 0;
    t.visit_vars(&mut |v| {
        fresh = fresh.max(v.param);
        f(v).visit_vars(&mut |w| fresh = fresh.max(w.param));
    });
    let mut s = Subst { f, fresh: fresh + 1, env: Vec::new() };
    s.term(t)
}

struct Subst<'a> {
    f: &'a dyn Fn(Var) -> Term,
    fresh: usize,
    env: Vec<(usize, usize)>,
}

impl Subst<'_> {
    fn lookup(&self, v: Var) -> Term {
        match self.env.iter().rev().find(|(old, _)| *old == v.param) {
            Some(&(_, new)) => Term::Var(Var { param: new, comp: v.comp }),
            None => (self.f)(v),
        }
    }

    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.lookup(*v),
            Term::Const(c) => Term::Const(*c),
            Term::Sum(a, b) => Term::Sum(Box::new(self.term(a)), Box::new(self.term(b))),
            Term::Diff(a, b) => Term::Diff(Box::new(self.term(a)), Box::new(self.term(b))),
            Term::Scale(k, a) => Term::Scale(*k, Box::new(self.term(a))),
            Term::Ite(c, a, b) => Term::Ite(Box::new(self.pred(c)), Box::new(self.term(a)), Box::new(self.term(b))),
        }
    }

    fn pred(&mut self, p: &Predicate) -> Predicate {
        match p {
            Predicate::True => Predicate::True,
            Predicate::False => Predicate::False,
            Predicate::Atom(a, r, b) => Predicate::Atom(self.term(a), *r, self.term(b)),
            Predicate::Not(q) => Predicate::Not(Box::new(self.pred(q))),
            Predicate::And(a, b) => Predicate::And(Box::new(self.pred(a)), Box::new(self.pred(b))),
            Predicate::Or(a, b) => Predicate::Or(Box::new(self.pred(a)), Box::new(self.pred(b))),
            Predicate::Exists(s, body) => {
                let mut images = BTreeSet::new();
                let mut bound = vec![*s];
                body.collect_free(&mut bound, &mut |v| {
                    self.lookup(v).visit_vars(&mut |w| {
                        images.insert(w.param);
                    });
                });
                let new = if images.contains(s) {
                    let n = self.fresh;
                    self.fresh += 1;
                    n
                } else {
                    *s
                };
                self.env.push((*s, new));
                let inner = self.pred(body);
                self.env.pop();
                Predicate::Exists(new, Box::new(inner))
            }
        }
    }
}

/// Renames free parameter slots by `mapping`; unmapped slots keep their index.
pub fn rename(p: &Predicate, mapping: &BTreeMap<usize, usize>) -> Result<Predicate> {
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for i in p.free_params() {
        let j = mapping.get(&i).copied().unwrap_or(i);
        if j == 0 {
            return Err(Error::MalformedPredicate(format!("x{i} renamed to slot 0")));
        }
        if let Some(prev) = seen.insert(j, i) {
            return Err(Error::NonInjectiveMapping(prev, i, j));
        }
    }
    Ok(substitute(p, &|v| Term::Var(Var { param: mapping.get(&v.param).copied().unwrap_or(v.param), comp: v.comp })))
}

/// Moves every free slot `i` to `i + by`.
pub(crate) fn shift_slots(p: &Predicate, by: usize) -> Predicate {
    substitute(p, &|v| Term::Var(Var { param: v.param + by, comp: v.comp }))
}

/// `φ^r`: slot `i` becomes slot `arity + 1 - i`.
pub fn reverse_predicate(p: &Predicate, arity: usize) -> Predicate {
    substitute(p, &|v| {
        let param = if (1..=arity).contains(&v.param) { arity + 1 - v.param } else { v.param };
        Term::Var(Var { param, comp: v.comp })
    })
}

/// `θ` instantiated on slot `slot` (θ has arity 1).
pub(crate) fn theta_at(theta: &Predicate, slot: usize) -> Predicate {
    substitute(theta, &|v| Term::Var(Var { param: if v.param == 1 { slot } else { v.param }, comp: v.comp }))
}

/// Projects `φ` (arity `k`) onto the observable positions `idx`: the other
/// positions are existentially quantified as jointly unobservable values,
/// the kept ones are required observable. Free slots stay in place.
pub fn exists_project(p: &Predicate, k: usize, idx: &[usize], theta: &Predicate) -> Result<Predicate> {
    for &i in idx {
        if i == 0 || i > k {
            return Err(Error::InvalidQuery(format!("observable index {i} outside [1:{k}]")));
        }
    }
    let hidden: Vec<usize> = (1..=k).filter(|j| !idx.contains(j)).collect();
    let mut parts: Vec<Predicate> = hidden.iter().map(|&j| theta_at(theta, j).not()).collect();
    parts.extend(idx.iter().map(|&i| theta_at(theta, i)));
    parts.push(p.clone());
    let mut out = Predicate::conj(parts);
    for &j in hidden.iter().rev() {
        out = Predicate::exists(j, out);
    }
    Ok(out)
}

/// Renames the slots in `idx` to `1..=idx.len()` in order.
pub(crate) fn compact(p: &Predicate, idx: &[usize]) -> Result<Predicate> {
    let mapping: BTreeMap<usize, usize> = idx.iter().enumerate().map(|(n, &i)| (i, n + 1)).collect();
    rename(p, &mapping)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{denotation, DomainSpec, Term as T};

    fn x(i: usize) -> T {
        T::var(i)
    }

    #[test]
    fn reverse_of_four_ary() {
        let p = x(1).gt(x(3)).and(x(2).differs(x(4)));
        let r = reverse_predicate(&p, 4);
        assert_eq!(r, x(4).gt(x(2)).and(x(3).differs(x(1))));
        assert_eq!(reverse_predicate(&r, 4), p);
    }

    #[test]
    fn reverse_of_arity_one_is_identity() {
        let p = x(1).ge(T::c(5));
        assert_eq!(reverse_predicate(&p, 1), p);
    }

    #[test]
    fn reverse_binary_guard() {
        let p = x(1).equals(x(2) + T::c(1)).and(x(2).ge(T::c(5)));
        let r = reverse_predicate(&p, 2);
        assert_eq!(r, x(2).equals(x(1) + T::c(1)).and(x(1).ge(T::c(5))));
    }

    #[test]
    fn identity_rename_is_structural_noop() {
        let p = Predicate::exists(2, x(2).lt(T::c(5)).and((x(1) + x(2)).gt(T::c(9))));
        assert_eq!(rename(&p, &BTreeMap::new()).unwrap(), p);
    }

    #[test]
    fn swap_reverses_denotation() {
        let p = x(1).lt(x(2));
        let m: BTreeMap<_, _> = [(1, 2), (2, 1)].into_iter().collect();
        let q = rename(&p, &m).unwrap();
        assert_eq!(q, x(2).lt(x(1)));
        let dom = DomainSpec::bounded(0, 3, 1);
        let mut a = denotation(&p, 2, &dom).unwrap();
        for t in &mut a {
            t.reverse();
        }
        a.sort();
        assert_eq!(a, denotation(&q, 2, &dom).unwrap());
    }

    #[test]
    fn non_injective_rename_is_rejected() {
        let p = x(1).lt(x(2));
        let m: BTreeMap<_, _> = [(1, 2)].into_iter().collect();
        assert!(matches!(rename(&p, &m), Err(Error::NonInjectiveMapping(1, 2, 2))));
    }

    #[test]
    fn rename_avoids_capture() {
        // ∃x1 (x1 < x2), renaming x2 -> x1 must not be captured.
        let p = Predicate::exists(1, x(1).lt(x(2)));
        let m: BTreeMap<_, _> = [(2, 1)].into_iter().collect();
        let q = rename(&p, &m).unwrap();
        assert_eq!(q, Predicate::exists(3, x(3).lt(x(1))));
    }

    #[test]
    fn project_example_guard() {
        let theta = x(1).ge(T::c(5));
        let phi = (x(1) + x(2)).gt(T::c(9));
        let got = exists_project(&phi, 2, &[1], &theta).unwrap();
        let want = Predicate::exists(2, x(2).ge(T::c(5)).not().and(x(1).ge(T::c(5))).and(phi.clone()));
        assert_eq!(got, want);
        let all = exists_project(&phi, 2, &[1, 2], &theta).unwrap();
        assert!(all.is_quantifier_free());
    }

    #[test]
    fn project_unobservable_guard_is_empty() {
        let theta = x(1).ge(T::c(5));
        let got = exists_project(&x(1).lt(T::c(4)), 1, &[1], &theta).unwrap();
        assert!(denotation(&got, 1, &DomainSpec::bounded(0, 20, 1)).unwrap().is_empty());
    }
}
