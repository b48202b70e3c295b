use super::{Efa, EfaTransition, Update};
use crate::algebra::{shift_slots, substitute, substitute_term, DomainKind, DomainSpec, Predicate, Term, Var};
use crate::model::EpEfa;

/// The EP-EFA as an EFA with a constant unit-width state parameter: guards
/// ignore it and every update keeps it.
pub fn embed_ep_efa(s: &EpEfa) -> Efa {
    let mut e = Efa::new(s.domain, DomainSpec::bounded(0, 0, 1));
    e.states = s.states.clone();
    e.tags = s.tags.clone();
    e.initial = s.initial.clone();
    e.marked = s.marked.clone();
    e.transitions = s
        .transitions
        .iter()
        .map(|t| EfaTransition {
            id: t.id.clone(),
            source: t.source,
            target: t.target,
            tag: t.tag.clone(),
            k: t.k,
            guard: shift_slots(&t.guard, 1),
            update: Update::Keep,
        })
        .collect();
    e
}

fn pad_value(d: &DomainSpec) -> i64 {
    match d.kind {
        DomainKind::Bounded(lo, hi) if !(lo..=hi).contains(&0) => lo,
        _ => 0,
    }
}

fn within(kind: DomainKind, t: Term) -> Vec<Predicate> {
    match kind {
        DomainKind::Integers => vec![],
        DomainKind::Naturals => vec![t.ge(Term::c(0))],
        DomainKind::Bounded(lo, hi) => vec![t.clone().ge(Term::c(lo)), t.le(Term::c(hi))],
    }
}

/// Replaces every transition of step length `k > 1` by a chain of `k`
/// one-step transitions through `k - 1` fresh states. The state parameter
/// is widened by `(K - 1)` event-parameter blocks (`K` the step length):
/// chain links store one event parameter each, the last link checks the
/// original guard on the stored values. The original parameter is carried
/// along in the leading components; extra components are reset to a fixed
/// pad value outside chains.
pub fn flatten_step_length(e: &Efa) -> Efa {
    let kmax = e.step_length();
    if kmax <= 1 {
        return e.clone();
    }
    let wy = e.state_domain.width;
    let wx = e.domain.width;
    let width = wy + (kmax - 1) * wx;
    let dom = e.state_domain.hull(&e.domain, width);
    let pad = pad_value(&dom);
    let widened = dom.kind != e.state_domain.kind;
    let y = |c: usize| Term::comp(1, c);
    let pads = || (wy + 1..=width).map(|_| Term::c(pad));
    // The original parameter must stay inside its own domain.
    let keep_in_y = |ts: &[Term]| -> Vec<Predicate> {
        if widened {
            ts.iter().flat_map(|t| within(e.state_domain.kind, t.clone())).collect()
        } else {
            vec![]
        }
    };

    let mut out = Efa::new(e.domain, dom);
    out.states = e.states.clone();
    out.tags = e.tags.clone();
    out.initial = e.initial.clone();
    out.marked = e.marked.clone();
    let mut y0 = vec![e.y0.clone()];
    y0.extend(keep_in_y(&(1..=wy).map(y).collect::<Vec<_>>()));
    y0.extend((wy + 1..=width).map(|c| y(c).equals(Term::c(pad))));
    out.y0 = Predicate::conj(y0);

    for t in &e.transitions {
        if t.k <= 1 {
            let (update, guard) = match &t.update {
                Update::Keep => (Update::Keep, t.guard.clone()),
                Update::Assign(ts) => {
                    let guard = Predicate::conj(std::iter::once(t.guard.clone()).chain(keep_in_y(ts)));
                    (Update::Assign(ts.iter().cloned().chain(pads()).collect()), guard)
                }
            };
            out.transitions.push(EfaTransition { guard, update, ..t.clone() });
            continue;
        }
        let mut prev = t.source;
        for j in 1..t.k {
            let mut name = format!("{}#{}", t.id, j);
            while out.state_index(&name).is_some() {
                name.push('\'');
            }
            let q = out.add_state(&name);
            let block = wy + (j - 1) * wx;
            let update = (1..=width).map(|c| if c > block && c <= block + wx { Term::comp(2, c - block) } else { y(c) }).collect();
            push(&mut out, t, j, prev, q, Predicate::True, Update::Assign(update));
            prev = q;
        }
        let k = t.k;
        let map = |v: Var| match v.param {
            1 => y(v.comp),
            p if p <= k => y(wy + (p - 2) * wx + v.comp),
            p if p == k + 1 => Term::comp(2, v.comp),
            p => Term::Var(Var { param: p, comp: v.comp }),
        };
        let mut guard = substitute(&t.guard, &map);
        let update = match &t.update {
            Update::Keep => (1..=wy).map(y).chain(pads()).collect(),
            Update::Assign(ts) => {
                let ts: Vec<Term> = ts.iter().map(|x| substitute_term(x, &map)).collect();
                guard = Predicate::conj(std::iter::once(guard).chain(keep_in_y(&ts)));
                ts.into_iter().chain(pads()).collect()
            }
        };
        push(&mut out, t, k, prev, t.target, guard, Update::Assign(update));
    }
    out
}

fn push(out: &mut Efa, t: &EfaTransition, j: usize, source: usize, target: usize, guard: Predicate, update: Update) {
    let tag = format!("{}#{}", t.tag, j);
    if !out.tags.contains(&tag) {
        out.tags.push(tag.clone());
    }
    out.transitions.push(EfaTransition { id: format!("{}#{}", t.id, j), source, target, tag, k: 1, guard, update });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn window() -> DomainSpec {
        DomainSpec::bounded(0, 3, 1)
    }

    #[test]
    fn embed_preserves_flat_languages() {
        let s = fixtures::registration();
        let e = embed_ep_efa(&s);
        assert!(e.validate().is_empty(), "{:?}", e.validate());
        assert_eq!(e.flat_data_languages(6, &window()).unwrap(), s.flat_data_languages(6, &window()).unwrap());
    }

    #[test]
    fn flatten_chain_shape() {
        let e = embed_ep_efa(&fixtures::registration());
        let f = flatten_step_length(&e);
        assert!(f.validate().is_empty(), "{:?}", f.validate());
        assert_eq!(f.step_length(), 1);
        assert_eq!(f.states.len(), e.states.len() + 2 * 2);
        assert_eq!(f.transitions.len(), 6);
        assert_eq!(f.state_domain.width, 1 + 2);
    }

    #[test]
    fn flatten_preserves_marked_flat_language() {
        let s = fixtures::registration();
        let f = flatten_step_length(&embed_ep_efa(&s));
        let (_, want) = s.flat_data_languages(6, &window()).unwrap();
        let (_, got) = f.flat_data_languages(6, &window()).unwrap();
        assert_eq!(got, want);
        assert!(!want.is_empty());
    }

    #[test]
    fn registration_efa_matches_registration_marked() {
        let (_, a) = fixtures::registration_efa().flat_data_languages(6, &window()).unwrap();
        let (_, b) = fixtures::registration().flat_data_languages(6, &window()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn one_step_input_unchanged() {
        let e = fixtures::registration_efa();
        assert_eq!(flatten_step_length(&e), e);
    }

    #[test]
    fn state_parameter_survives_the_chain() {
        // y counts completed pairs; the pair must be increasing.
        let e = Efa::new(DomainSpec::bounded(0, 3, 1), DomainSpec::bounded(0, 2, 1))
            .with_initial(["q"])
            .with_marked(["q"])
            .with_y0("(= y1 0)")
            .unwrap()
            .with_transition("t", "q", "p", 2, "(< x1 x2)", Some(&["(+ y1 1)"]), "q")
            .unwrap();
        let f = flatten_step_length(&e);
        let w = DomainSpec::bounded(0, 3, 1);
        assert_eq!(f.flat_data_languages(6, &w).unwrap().1, e.flat_data_languages(6, &w).unwrap().1);
        // Three pairs overflow the counter in both.
        assert!(e.flat_data_languages(6, &w).unwrap().1.iter().all(|s| s.len() <= 4));
    }
}
