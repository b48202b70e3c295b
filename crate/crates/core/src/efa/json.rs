use serde::{Deserialize, Serialize};

use super::{Efa, EfaTransition, Update};
use crate::algebra::{parse_predicate, parse_term, DomainSpec, VarStyle};
use crate::{Error, Result};

/// On-disk JSON form of an EFA. Guards, `y0` and update terms use `y<j>` for
/// the state parameter and `x<i>` for event parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfaDoc {
    pub domain: DomainSpec,
    pub state_domain: DomainSpec,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<String>>,
    pub initial: Vec<String>,
    #[serde(default)]
    pub marked: Vec<String>,
    #[serde(default = "true_pred")]
    pub y0: String,
    pub transitions: Vec<EfaTransitionDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfaTransitionDoc {
    pub id: String,
    pub source: String,
    pub tag: String,
    pub k: usize,
    #[serde(default = "true_pred")]
    pub guard: String,
    /// Absent or null keeps the parameter unchanged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update: Option<Vec<String>>,
    pub target: String,
}

fn true_pred() -> String {
    "true".into()
}

impl EfaDoc {
    pub fn from_json(src: &str) -> Result<Self> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn into_model(&self) -> Result<Efa> {
        let mut diags = Vec::new();
        let mut e = Efa::new(self.domain, self.state_domain);
        for s in &self.states {
            if e.state_index(s).is_some() {
                diags.push(format!("duplicate state '{s}'"));
            }
            e.add_state(s);
        }
        if let Some(evs) = &self.events {
            e.tags = evs.clone();
        }
        let lookup = |what: &str, name: &str, diags: &mut Vec<String>| {
            let i = e.state_index(name);
            if i.is_none() {
                diags.push(format!("{what} refers to unknown state '{name}'"));
            }
            i
        };
        let initial = self.initial.iter().filter_map(|s| lookup("initial", s, &mut diags)).collect();
        let marked = self.marked.iter().filter_map(|s| lookup("marked", s, &mut diags)).collect();
        let mut transitions = Vec::new();
        for t in &self.transitions {
            let what = format!("transition '{}'", t.id);
            let source = lookup(&what, &t.source, &mut diags);
            let target = lookup(&what, &t.target, &mut diags);
            let guard = parse_predicate(&t.guard, VarStyle::StateEvent).map_err(|err| diags.push(format!("{what}: {err}")));
            let update = match &t.update {
                None => Ok(Update::Keep),
                Some(ts) => ts
                    .iter()
                    .map(|s| parse_term(s, VarStyle::StateEvent))
                    .collect::<Result<Vec<_>>>()
                    .map(Update::Assign)
                    .map_err(|err| diags.push(format!("{what} update: {err}"))),
            };
            if let (Some(source), Some(target), Ok(guard), Ok(update)) = (source, target, guard, update) {
                transitions.push(EfaTransition { id: t.id.clone(), source, target, tag: t.tag.clone(), k: t.k, guard, update });
            }
        }
        match parse_predicate(&self.y0, VarStyle::StateEvent) {
            Ok(p) => e.y0 = p,
            Err(err) => diags.push(format!("y0: {err}")),
        }
        e.initial = initial;
        e.marked = marked;
        for t in transitions {
            if self.events.is_none() && !e.tags.contains(&t.tag) {
                e.tags.push(t.tag.clone());
            }
            e.transitions.push(t);
        }
        diags.extend(e.validate());
        if diags.is_empty() {
            Ok(e)
        } else {
            Err(Error::InvalidModel(diags.join("; ")))
        }
    }

    pub fn from_model(e: &Efa) -> Self {
        EfaDoc {
            domain: e.domain,
            state_domain: e.state_domain,
            states: e.states.clone(),
            events: Some(e.tags.clone()),
            initial: e.names(&e.initial),
            marked: e.names(&e.marked),
            y0: e.y0.to_sexpr(VarStyle::StateEvent),
            transitions: e
                .transitions
                .iter()
                .map(|t| EfaTransitionDoc {
                    id: t.id.clone(),
                    source: e.states[t.source].clone(),
                    tag: t.tag.clone(),
                    k: t.k,
                    guard: t.guard.to_sexpr(VarStyle::StateEvent),
                    update: match &t.update {
                        Update::Keep => None,
                        Update::Assign(ts) => Some(ts.iter().map(|x| x.to_sexpr(VarStyle::StateEvent)).collect()),
                    },
                    target: e.states[t.target].clone(),
                })
                .collect(),
        }
    }
}

impl Efa {
    pub fn from_json(src: &str) -> Result<Self> {
        EfaDoc::from_json(src)?.into_model()
    }

    pub fn to_json(&self) -> String {
        EfaDoc::from_model(self).to_json()
    }
}
