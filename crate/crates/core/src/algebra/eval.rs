use super::{DomainSpec, Predicate, Signature, Term};
use crate::{Error, Result};

/// Direct evaluator for predicates on concrete parameter values.
///
/// Quantified slots are evaluated by iterating their domain, so a bound
/// (or bounded domains) is needed as soon as an `Exists` is reached.
#[derive(Clone, Debug)]
pub struct Evaluator {
    sig: Signature,
    bound: Option<i64>,
    offsets: Vec<usize>,
    vals: Vec<i64>,
}

impl Evaluator {
    pub fn new(sig: &Signature, bound: Option<i64>) -> Self {
        let mut ev = Evaluator { sig: sig.clone(), bound, offsets: Vec::new(), vals: Vec::new() };
        ev.ensure(sig.arity());
        ev
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    fn ensure(&mut self, slots: usize) {
        while self.offsets.len() < slots {
            let i = self.offsets.len() + 1;
            self.offsets.push(self.vals.len());
            let w = self.sig.slot(i).width;
            self.vals.extend(std::iter::repeat_n(0, w));
        }
    }

    /// Loads a flat tuple covering the free slots in order.
    pub fn load(&mut self, flat: &[i64]) {
        let n = flat.len().min(self.sig.flat_len());
        self.vals[..n].copy_from_slice(&flat[..n]);
    }

    pub fn set_slot(&mut self, slot: usize, elem: &[i64]) {
        self.ensure(slot);
        let at = self.offsets[slot - 1];
        self.vals[at..at + elem.len()].copy_from_slice(elem);
    }

    pub fn holds(&mut self, p: &Predicate) -> Result<bool> {
        self.ensure(p.max_slot());
        self.pred(p)
    }

    /// Evaluates `p` on the flat tuple `flat`.
    pub fn holds_on(&mut self, p: &Predicate, flat: &[i64]) -> Result<bool> {
        self.load(flat);
        self.holds(p)
    }

    pub fn eval_term(&mut self, t: &Term) -> Result<i64> {
        let mut m = 0;
        t.visit_vars(&mut |v| m = m.max(v.param));
        self.ensure(m);
        self.term(t)
    }

    fn pred(&mut self, p: &Predicate) -> Result<bool> {
        Ok(match p {
            Predicate::True => true,
            Predicate::False => false,
            Predicate::Atom(a, r, b) => {
                let x = self.term(a)?;
                let y = self.term(b)?;
                r.holds(x, y)
            }
            Predicate::Not(q) => !self.pred(q)?,
            Predicate::And(a, b) => self.pred(a)? && self.pred(b)?,
            Predicate::Or(a, b) => self.pred(a)? || self.pred(b)?,
            Predicate::Exists(s, body) => self.exists(*s, body)?,
        })
    }

    fn exists(&mut self, slot: usize, body: &Predicate) -> Result<bool> {
        let dom = *self.sig.slot(slot);
        let (lo, hi) = dom.component_range(self.bound)?;
        let at = self.offsets[slot - 1];
        let saved: Vec<i64> = self.vals[at..at + dom.width].to_vec();
        for c in &mut self.vals[at..at + dom.width] {
            *c = lo;
        }
        let mut found = false;
        loop {
            if self.pred(body)? {
                found = true;
                break;
            }
            if !super::domain::odometer_step(&mut self.vals[at..at + dom.width], lo, hi) {
                break;
            }
        }
        self.vals[at..at + dom.width].copy_from_slice(&saved);
        Ok(found)
    }

    fn term(&mut self, t: &Term) -> Result<i64> {
        let overflow = || Error::MalformedPredicate("arithmetic overflow".into());
        Ok(match t {
            Term::Var(v) => {
                let at = self
                    .offsets
                    .get(v.param.wrapping_sub(1))
                    .ok_or_else(|| Error::MalformedPredicate(format!("unbound slot x{}", v.param)))?;
                self.vals[at + v.comp - 1]
            }
            Term::Const(c) => *c,
            Term::Sum(a, b) => self.term(a)?.checked_add(self.term(b)?).ok_or_else(overflow)?,
            Term::Diff(a, b) => self.term(a)?.checked_sub(self.term(b)?).ok_or_else(overflow)?,
            Term::Scale(k, a) => self.term(a)?.checked_mul(*k).ok_or_else(overflow)?,
            Term::Ite(c, a, b) => {
                if self.pred(c)? {
                    self.term(a)?
                } else {
                    self.term(b)?
                }
            }
        })
    }
}

/// Iterates every flat tuple over the free slots of `sig`, lexicographically.
pub(crate) fn for_each_tuple(sig: &Signature, bound: Option<i64>, mut f: impl FnMut(&[i64]) -> Result<bool>) -> Result<()> {
    let mut ranges = Vec::new();
    for d in sig.slots() {
        let r = d.component_range(bound)?;
        ranges.extend(std::iter::repeat_n(r, d.width));
    }
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        if !f(&cur)? {
            return Ok(());
        }
        let mut advanced = false;
        for i in (0..cur.len()).rev() {
            if cur[i] < ranges[i].1 {
                cur[i] += 1;
                for (j, c) in cur.iter_mut().enumerate().skip(i + 1) {
                    *c = ranges[j].0;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return Ok(());
        }
    }
}

/// `⟦φ⟧` over a bounded domain, as flat tuples in lexicographic order.
pub fn denotation(p: &Predicate, arity: usize, domain: &DomainSpec) -> Result<Vec<Vec<i64>>> {
    denotation_in(p, &Signature::uniform(*domain, arity))
}

pub fn denotation_in(p: &Predicate, sig: &Signature) -> Result<Vec<Vec<i64>>> {
    if !sig.all_bounded() {
        return Err(Error::UnboundedDomain);
    }
    p.check_well_formed(sig)?;
    let mut ev = Evaluator::new(sig, None);
    let mut out = Vec::new();
    for_each_tuple(sig, None, |t| {
        if ev.holds_on(p, t)? {
            out.push(t.to_vec());
        }
        Ok(true)
    })?;
    Ok(out)
}
