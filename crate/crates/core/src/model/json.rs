use serde::{Deserialize, Serialize};

use super::{guard_diagnostics, EpEfa, Transition};
use crate::algebra::{parse_predicate, DomainSpec, VarStyle};
use crate::{Error, Result};

/// On-disk JSON form of an EP-EFA.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub domain: DomainSpec,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<String>>,
    pub initial: Vec<String>,
    #[serde(default)]
    pub marked: Vec<String>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub id: String,
    pub source: String,
    pub tag: String,
    pub k: usize,
    #[serde(default = "true_guard")]
    pub guard: String,
    pub target: String,
}

fn true_guard() -> String {
    "true".into()
}

impl ModelDoc {
    pub fn from_json(src: &str) -> Result<Self> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Every problem found in the document; empty means it converts cleanly.
    pub fn diagnostics(&self) -> Vec<String> {
        match self.convert() {
            Ok(m) => m.validate(),
            Err(d) => d,
        }
    }

    fn convert(&self) -> std::result::Result<EpEfa, Vec<String>> {
        let mut diags = Vec::new();
        let mut m = EpEfa::new(self.domain);
        for s in &self.states {
            if m.state_index(s).is_some() {
                diags.push(format!("duplicate state '{s}'"));
            }
            m.add_state(s);
        }
        if let Some(evs) = &self.events {
            m.tags = evs.clone();
        }
        let lookup = |what: &str, name: &str, diags: &mut Vec<String>| match m.state_index(name) {
            Some(i) => Some(i),
            None => {
                diags.push(format!("{what} refers to unknown state '{name}'"));
                None
            }
        };
        let initial: Vec<_> = self.initial.iter().filter_map(|s| lookup("initial", s, &mut diags)).collect();
        let marked: Vec<_> = self.marked.iter().filter_map(|s| lookup("marked", s, &mut diags)).collect();
        let mut transitions = Vec::new();
        for t in &self.transitions {
            let what = format!("transition '{}'", t.id);
            let source = lookup(&what, &t.source, &mut diags);
            let target = lookup(&what, &t.target, &mut diags);
            let guard = match parse_predicate(&t.guard, VarStyle::Plain) {
                Ok(g) => Some(g),
                Err(e) => {
                    diags.push(format!("{what}: {e}"));
                    None
                }
            };
            if let (Some(source), Some(target), Some(guard)) = (source, target, guard) {
                transitions.push(Transition { id: t.id.clone(), source, target, tag: t.tag.clone(), k: t.k, guard });
            }
        }
        m.initial = initial.into_iter().collect();
        m.marked = marked.into_iter().collect();
        for t in transitions {
            if self.events.is_none() && !m.tags.contains(&t.tag) {
                m.tags.push(t.tag.clone());
            }
            m.transitions.push(t);
        }
        if diags.is_empty() {
            Ok(m)
        } else {
            // Report guard arity problems too, for the transitions that parsed.
            for t in &m.transitions {
                diags.extend(guard_diagnostics(&t.id, t.k, &t.guard, &m.guard_signature(t.k)));
            }
            Err(diags)
        }
    }

    pub fn into_model(&self) -> Result<EpEfa> {
        let m = self.convert().map_err(|d| Error::InvalidModel(d.join("; ")))?;
        let d = m.validate();
        if d.is_empty() {
            Ok(m)
        } else {
            Err(Error::InvalidModel(d.join("; ")))
        }
    }

    pub fn from_model(m: &EpEfa) -> Self {
        ModelDoc {
            domain: m.domain,
            states: m.states.clone(),
            events: Some(m.tags.clone()),
            initial: m.names(&m.initial),
            marked: m.names(&m.marked),
            transitions: m
                .transitions
                .iter()
                .map(|t| TransitionDoc {
                    id: t.id.clone(),
                    source: m.states[t.source].clone(),
                    tag: t.tag.clone(),
                    k: t.k,
                    guard: t.guard.to_string(),
                    target: m.states[t.target].clone(),
                })
                .collect(),
        }
    }
}

impl EpEfa {
    pub fn from_json(src: &str) -> Result<Self> {
        ModelDoc::from_json(src)?.into_model()
    }

    pub fn to_json(&self) -> String {
        ModelDoc::from_model(self).to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip_five_state() {
        let s = fixtures::five_state();
        let back = EpEfa::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn spec_shape_parses() {
        let src = r#"{"domain": {"kind":"naturals", "width":1}, "states":["q0","q1"], "initial":["q0"],
            "marked":[], "transitions":[{"id":"t1","source":"q0","tag":"sigma1","k":1,"guard":"(< x1 4)","target":"q1"}]}"#;
        let m = EpEfa::from_json(src).unwrap();
        assert_eq!(m.tags, ["sigma1"]);
        assert_eq!(m.transitions[0].guard.to_string(), "(< x1 4)");
    }

    #[test]
    fn dangling_and_arity_diagnostics() {
        let src = r#"{"domain": {"kind":"naturals", "width":1}, "states":["q0"], "initial":["q9"],
            "transitions":[{"id":"t1","source":"q0","tag":"a","k":2,"guard":"(< x3 4)","target":"q1"},
                           {"id":"t2","source":"q0","tag":"a","k":1,"guard":"(< x1","target":"q0"}]}"#;
        let d = ModelDoc::from_json(src).unwrap().diagnostics();
        assert!(d.iter().any(|m| m.contains("unknown state 'q9'")), "{d:?}");
        assert!(d.iter().any(|m| m.contains("unknown state 'q1'")), "{d:?}");
        assert!(d.iter().any(|m| m.contains("t2") && m.contains("parse")), "{d:?}");
        assert!(EpEfa::from_json(src).is_err());
    }
}
