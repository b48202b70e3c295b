use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Naturals,
    Integers,
    Bounded(i64, i64),
}

/// Domain of one parameter: `width`-dimensional vectors over `kind`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub width: usize,
}

impl DomainSpec {
    pub fn naturals(width: usize) -> Self {
        DomainSpec { kind: DomainKind::Naturals, width }
    }

    pub fn integers(width: usize) -> Self {
        DomainSpec { kind: DomainKind::Integers, width }
    }

    pub fn bounded(lo: i64, hi: i64, width: usize) -> Self {
        DomainSpec { kind: DomainKind::Bounded(lo, hi), width }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::InvalidModel("domain width must be at least 1".into()));
        }
        if let DomainKind::Bounded(lo, hi) = self.kind {
            if lo > hi {
                return Err(Error::InvalidModel(format!("empty bounded domain [{lo}:{hi}]")));
            }
        }
        Ok(())
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.kind, DomainKind::Bounded(..))
    }

    pub fn contains_value(&self, v: i64) -> bool {
        match self.kind {
            DomainKind::Naturals => v >= 0,
            DomainKind::Integers => true,
            DomainKind::Bounded(lo, hi) => lo <= v && v <= hi,
        }
    }

    pub fn contains(&self, elem: &[i64]) -> bool {
        elem.len() == self.width && elem.iter().all(|&v| self.contains_value(v))
    }

    /// Inclusive per-component range used for enumeration. Unbounded kinds
    /// are truncated to `[0:bound]` or `[-bound:bound]`.
    pub fn component_range(&self, bound: Option<i64>) -> Result<(i64, i64)> {
        match (self.kind, bound) {
            (DomainKind::Bounded(lo, hi), _) => Ok((lo, hi)),
            (DomainKind::Naturals, Some(b)) => Ok((0, b.max(0))),
            (DomainKind::Integers, Some(b)) => Ok((-b.abs(), b.abs())),
            (_, None) => Err(Error::UnboundedDomain),
        }
    }

    /// All elements in lexicographic order.
    pub fn elements(&self, bound: Option<i64>) -> Result<Vec<Vec<i64>>> {
        let (lo, hi) = self.component_range(bound)?;
        let mut out = Vec::new();
        let mut cur = vec![lo; self.width];
        loop {
            out.push(cur.clone());
            if !odometer_step(&mut cur, lo, hi) {
                break;
            }
        }
        Ok(out)
    }

    /// Smallest domain containing both (used when widening state vectors).
    pub fn hull(&self, other: &DomainSpec, width: usize) -> DomainSpec {
        use DomainKind::*;
        let kind = match (self.kind, other.kind) {
            (Bounded(a, b), Bounded(c, d)) => Bounded(a.min(c), b.max(d)),
            (Integers, _) | (_, Integers) => Integers,
            (Naturals, Naturals) => Naturals,
            (Naturals, Bounded(lo, _)) | (Bounded(lo, _), Naturals) => {
                if lo >= 0 {
                    Naturals
                } else {
                    Integers
                }
            }
        };
        DomainSpec { kind, width }
    }
}

/// Advances `cur` lexicographically within `[lo:hi]^n`; false once exhausted.
pub(crate) fn odometer_step(cur: &mut [i64], lo: i64, hi: i64) -> bool {
    for i in (0..cur.len()).rev() {
        if cur[i] < hi {
            cur[i] += 1;
            for c in cur.iter_mut().skip(i + 1) {
                *c = lo;
            }
            return true;
        }
    }
    false
}

/// Per-slot domains of a predicate's free parameters; slots beyond the
/// arity (quantifier-bound ones) range over `extra`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    slots: Vec<DomainSpec>,
    extra: DomainSpec,
}

impl Signature {
    pub fn uniform(domain: DomainSpec, arity: usize) -> Self {
        Signature { slots: vec![domain; arity], extra: domain }
    }

    pub fn new(slots: Vec<DomainSpec>, extra: DomainSpec) -> Self {
        Signature { slots, extra }
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    /// Domain of slot `i` (1-based).
    pub fn slot(&self, i: usize) -> &DomainSpec {
        self.slots.get(i.wrapping_sub(1)).unwrap_or(&self.extra)
    }

    pub fn slots(&self) -> &[DomainSpec] {
        &self.slots
    }

    pub fn extra(&self) -> &DomainSpec {
        &self.extra
    }

    pub fn all_bounded(&self) -> bool {
        self.slots.iter().all(DomainSpec::is_bounded) && self.extra.is_bounded()
    }

    /// Total number of integer components across the free slots.
    pub fn flat_len(&self) -> usize {
        self.slots.iter().map(|d| d.width).sum()
    }

    /// Splits a flat tuple into per-slot elements.
    pub fn split<'a>(&self, flat: &'a [i64]) -> Vec<&'a [i64]> {
        let mut out = Vec::with_capacity(self.slots.len());
        let mut at = 0;
        for d in &self.slots {
            out.push(&flat[at..at + d.width]);
            at += d.width;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let d: DomainSpec = serde_json::from_str(r#"{"kind":{"bounded":[0,7]},"width":1}"#).unwrap();
        assert_eq!(d, DomainSpec::bounded(0, 7, 1));
        let n: DomainSpec = serde_json::from_str(r#"{"kind":"naturals","width":3}"#).unwrap();
        assert_eq!(n, DomainSpec::naturals(3));
        assert_eq!(serde_json::to_string(&DomainSpec::integers(1)).unwrap(), r#"{"kind":"integers","width":1}"#);
    }

    #[test]
    fn invalid_domains() {
        assert!(DomainSpec::bounded(3, 2, 1).validate().is_err());
        assert!(DomainSpec::naturals(0).validate().is_err());
        assert!(DomainSpec::bounded(2, 2, 1).validate().is_ok());
    }

    #[test]
    fn elements_are_lexicographic() {
        let d = DomainSpec::bounded(0, 1, 2);
        assert_eq!(d.elements(None).unwrap(), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert!(DomainSpec::naturals(1).elements(None).is_err());
        assert_eq!(DomainSpec::integers(1).elements(Some(1)).unwrap().len(), 3);
    }
}
