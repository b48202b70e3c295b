use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{parse_predicate, DomainSpec, Evaluator, Predicate, Signature, VarStyle};
use crate::Result;

/// One domain element (a vector of `width` integers).
pub type Elem = Vec<i64>;
/// One tuple of parameters, e.g. the parameters of a single event.
pub type Unit = Vec<Elem>;

/// A parameterized event `σ⟨a1, ..., ak⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub tag: String,
    pub params: Unit,
}

impl Event {
    pub fn new(tag: &str, params: Unit) -> Self {
        Event { tag: tag.to_string(), params }
    }

    /// An event over a width-1 domain.
    pub fn scalar(tag: &str, xs: &[i64]) -> Self {
        Event::new(tag, xs.iter().map(|&x| vec![x]).collect())
    }

    /// Parses `sigma2(6,5)`, `tau` or `sigma(1;2;3, 4;5;6)` (`;` separates
    /// vector components).
    pub fn parse(src: &str) -> Result<Self> {
        let bad = |msg: &str| crate::Error::Parse { pos: 0, msg: format!("{msg} in event '{src}'") };
        let src = src.trim();
        let Some(open) = src.find('(') else {
            if src.is_empty() {
                return Err(bad("empty tag"));
            }
            return Ok(Event::new(src, Vec::new()));
        };
        if !src.ends_with(')') {
            return Err(bad("missing ')'"));
        }
        let tag = &src[..open];
        let inner = src[open + 1..src.len() - 1].trim();
        let mut params = Vec::new();
        if !inner.is_empty() {
            for p in inner.split(',') {
                let elem: std::result::Result<Elem, _> = p.split(';').map(|c| c.trim().parse::<i64>()).collect();
                params.push(elem.map_err(|_| bad("bad parameter"))?);
            }
        }
        if tag.is_empty() {
            return Err(bad("empty tag"));
        }
        Ok(Event::new(tag, params))
    }

    /// Parses a whitespace-separated event list.
    pub fn parse_list(src: &str) -> Result<Vec<Event>> {
        // Split on whitespace that is not inside parentheses.
        let mut out = Vec::new();
        let mut depth = 0;
        let mut cur = String::new();
        for c in src.chars() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            if c.is_whitespace() && depth == 0 {
                if !cur.is_empty() {
                    out.push(Event::parse(&cur)?);
                    cur.clear();
                }
            } else {
                cur.push(c);
            }
        }
        if !cur.is_empty() {
            out.push(Event::parse(&cur)?);
        }
        Ok(out)
    }
}

fn write_elem(f: &mut fmt::Formatter<'_>, e: &Elem) -> fmt::Result {
    let parts: Vec<String> = e.iter().map(|v| v.to_string()).collect();
    f.write_str(&parts.join(";"))
}

fn write_unit(f: &mut fmt::Formatter<'_>, u: &Unit) -> fmt::Result {
    for (i, e) in u.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write_elem(f, e)?;
    }
    Ok(())
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag)?;
        if !self.params.is_empty() {
            f.write_str("(")?;
            write_unit(f, &self.params)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Tag-stripped parameter tuples; zero-length tuples are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataString(pub Vec<Unit>);

impl DataString {
    pub fn of(u: &[Event]) -> Self {
        DataString(u.iter().filter(|e| !e.params.is_empty()).map(|e| e.params.clone()).collect())
    }

    /// The flat data string: every component in order.
    pub fn flat(&self) -> Vec<i64> {
        self.0.iter().flatten().flatten().copied().collect()
    }

    pub fn reversed(&self) -> Self {
        DataString(self.0.iter().rev().map(|u| u.iter().rev().cloned().collect()).collect())
    }
}

/// A sequence of nonempty observable units. Unit boundaries are significant.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Observation(pub Vec<Unit>);

impl Observation {
    pub fn empty() -> Self {
        Observation(Vec::new())
    }

    /// Width-1 observation from plain numbers.
    pub fn scalar(units: &[&[i64]]) -> Self {
        Observation(units.iter().map(|u| u.iter().map(|&x| vec![x]).collect()).collect())
    }

    pub fn units(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reverses the unit order and the element order within each unit.
    pub fn reversed(&self) -> Self {
        Observation(self.0.iter().rev().map(|u| u.iter().rev().cloned().collect()).collect())
    }

    pub fn concat(&self, other: &Observation) -> Self {
        Observation(self.0.iter().chain(&other.0).cloned().collect())
    }

    /// JSON form: each unit a list; width-1 elements as plain numbers.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value;
        let elem = |e: &Elem| {
            if e.len() == 1 {
                Value::from(e[0])
            } else {
                Value::from(e.clone())
            }
        };
        Value::Array(self.0.iter().map(|u| Value::Array(u.iter().map(elem).collect())).collect())
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for u in &self.0 {
            f.write_str("⟨")?;
            write_unit(f, u)?;
            f.write_str("⟩")?;
        }
        Ok(())
    }
}

/// The static observability condition `ϑ` on single data elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationSpec {
    pub theta: Predicate,
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    theta: String,
}

impl ObservationSpec {
    pub fn new(theta: Predicate) -> Self {
        ObservationSpec { theta }
    }

    pub fn parse(theta: &str) -> Result<Self> {
        Ok(ObservationSpec { theta: parse_predicate(theta, VarStyle::Plain)? })
    }

    /// Reads the `{"theta": "..."}` form.
    pub fn from_json(src: &str) -> Result<Self> {
        let doc: SpecDoc = serde_json::from_str(src)?;
        Self::parse(&doc.theta)
    }

    pub fn everything() -> Self {
        ObservationSpec { theta: Predicate::True }
    }

    pub fn nothing() -> Self {
        ObservationSpec { theta: Predicate::False }
    }

    pub fn evaluator(&self, domain: &DomainSpec) -> Evaluator {
        let bound = if domain.is_bounded() { None } else { Some(super::QUANTIFIER_EVAL_BOUND) };
        Evaluator::new(&Signature::uniform(*domain, 1), bound)
    }

    pub fn observes(&self, ev: &mut Evaluator, elem: &Elem) -> Result<bool> {
        ev.holds_on(&self.theta, elem)
    }

    /// Keeps observable elements, drops units that become empty.
    pub fn observe(&self, d: &DataString, domain: &DomainSpec) -> Result<Observation> {
        let mut ev = self.evaluator(domain);
        let mut out = Vec::new();
        for unit in &d.0 {
            let mut kept = Vec::new();
            for e in unit {
                if self.observes(&mut ev, e)? {
                    kept.push(e.clone());
                }
            }
            if !kept.is_empty() {
                out.push(kept);
            }
        }
        Ok(Observation(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(units: &[&[i64]]) -> DataString {
        DataString(Observation::scalar(units).0)
    }

    #[test]
    fn observation_drops_hidden_elements() {
        let spec = ObservationSpec::parse("(>= x1 5)").unwrap();
        let dom = DomainSpec::naturals(1);
        assert_eq!(spec.observe(&ds(&[&[3, 7], &[5]]), &dom).unwrap(), Observation::scalar(&[&[7], &[5]]));
        assert!(spec.observe(&ds(&[&[3, 4]]), &dom).unwrap().is_empty());
    }

    #[test]
    fn unit_boundaries_matter() {
        let all = ObservationSpec::everything();
        let dom = DomainSpec::naturals(1);
        let a = all.observe(&ds(&[&[6, 7]]), &dom).unwrap();
        let b = all.observe(&ds(&[&[6], &[7]]), &dom).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn data_strings_drop_empty_tuples() {
        let u = vec![Event::scalar("a", &[1, 2]), Event::scalar("tau", &[]), Event::scalar("b", &[3])];
        assert_eq!(DataString::of(&u), ds(&[&[1, 2], &[3]]));
        assert_eq!(DataString::of(&u).flat(), vec![1, 2, 3]);
    }

    #[test]
    fn event_syntax() {
        let evs = Event::parse_list("sigma2(6,5) sigma4(3) tau v(1;2;3, 4;5;6)").unwrap();
        assert_eq!(evs[0], Event::scalar("sigma2", &[6, 5]));
        assert_eq!(evs[2], Event::new("tau", vec![]));
        assert_eq!(evs[3].params, vec![vec![1, 2, 3], vec![4, 5, 6]]);
        assert_eq!(evs[3].to_string(), "v(1;2;3,4;5;6)");
        assert!(Event::parse("x(1,a)").is_err());
    }

    #[test]
    fn observation_json_and_display() {
        let w = Observation::scalar(&[&[5], &[6, 7]]);
        assert_eq!(w.to_json().to_string(), "[[5],[6,7]]");
        assert_eq!(w.to_string(), "⟨5⟩⟨6,7⟩");
        assert_eq!(w.reversed(), Observation::scalar(&[&[7, 6], &[5]]));
        assert_eq!(ObservationSpec::from_json(r#"{"theta":"(>= x1 5)"}"#).unwrap().theta.to_string(), "(>= x1 5)");
    }
}
