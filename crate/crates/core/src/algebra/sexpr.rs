//! Concrete s-expression syntax.
//!
//! ```text
//! (and (>= x1 5) (= x2 (+ x1 1)))
//! (exists x2 (and (< x2 5) (> (+ x1 x2) 9)))
//! (= x1.3 (ite (= y1 0) 4 (+ y3 1)))
//! ```

use super::{Predicate, Rel, Term, Var};
use crate::{Error, Result};

/// How variable names map to parameter slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarStyle {
    /// `x<i>` / `x<i>.<j>` name slot `i`.
    Plain,
    /// State-parameter guards: `y<j>` is component `j` of slot 1, and
    /// `x<i>` / `x<i>.<j>` name event slot `i + 1`.
    StateEvent,
}

#[derive(Clone, Debug, PartialEq)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn perr<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { pos, msg: msg.into() })
}

fn read(src: &str) -> Result<Sexp> {
    let bytes = src.as_bytes();
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut done: Option<Sexp> = None;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if done.is_some() {
            return perr(i, "trailing input after expression");
        }
        let item = match c {
            b'(' => {
                stack.push((Vec::new(), i));
                i += 1;
                continue;
            }
            b')' => {
                let Some((items, start)) = stack.pop() else {
                    return perr(i, "unbalanced ')'");
                };
                i += 1;
                Sexp::List(items, start)
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                Sexp::Atom(src[start..i].to_string(), start)
            }
        };
        match stack.last_mut() {
            Some((items, _)) => items.push(item),
            None => done = Some(item),
        }
    }
    if let Some((_, start)) = stack.last() {
        return perr(*start, "unclosed '('");
    }
    match done {
        Some(s) => Ok(s),
        None => perr(src.len(), "empty input"),
    }
}

fn parse_index(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok().filter(|&n| n >= 1)
}

fn parse_var(name: &str, style: VarStyle) -> Option<Var> {
    let (head, comp) = match name.split_once('.') {
        Some((h, c)) => (h, parse_index(c)?),
        None => (name, 1),
    };
    if let Some(rest) = head.strip_prefix('x') {
        let i = parse_index(rest)?;
        let param = match style {
            VarStyle::Plain => i,
            VarStyle::StateEvent => i + 1,
        };
        return Some(Var { param, comp });
    }
    if style == VarStyle::StateEvent && !name.contains('.') {
        if let Some(rest) = head.strip_prefix('y') {
            return Some(Var { param: 1, comp: parse_index(rest)? });
        }
    }
    None
}

fn parse_binder(name: &str, style: VarStyle) -> Option<usize> {
    match style {
        VarStyle::Plain => parse_index(name.strip_prefix('x')?),
        VarStyle::StateEvent if name == "y" => Some(1),
        VarStyle::StateEvent => parse_index(name.strip_prefix('x')?).map(|i| i + 1),
    }
}

fn rel_of(op: &str) -> Option<Rel> {
    Some(match op {
        "=" => Rel::Eq,
        "distinct" | "!=" => Rel::Ne,
        "<" => Rel::Lt,
        "<=" => Rel::Le,
        ">" => Rel::Gt,
        ">=" => Rel::Ge,
        _ => return None,
    })
}

fn to_pred(e: &Sexp, style: VarStyle) -> Result<Predicate> {
    match e {
        Sexp::Atom(a, pos) => match a.as_str() {
            "true" => Ok(Predicate::True),
            "false" => Ok(Predicate::False),
            _ => perr(*pos, format!("expected a predicate, found '{a}'")),
        },
        Sexp::List(items, pos) => {
            let Some(Sexp::Atom(op, _)) = items.first() else {
                return perr(*pos, "expected an operator");
            };
            let args = &items[1..];
            match op.as_str() {
                "and" | "or" => {
                    let ps = args.iter().map(|a| to_pred(a, style)).collect::<Result<Vec<_>>>()?;
                    Ok(if op == "and" { Predicate::conj(ps) } else { Predicate::disj(ps) })
                }
                "not" => {
                    if args.len() != 1 {
                        return perr(*pos, "'not' takes one argument");
                    }
                    Ok(to_pred(&args[0], style)?.not())
                }
                "=>" => {
                    if args.len() != 2 {
                        return perr(*pos, "'=>' takes two arguments");
                    }
                    Ok(to_pred(&args[0], style)?.not().or(to_pred(&args[1], style)?))
                }
                "exists" => {
                    if args.len() != 2 {
                        return perr(*pos, "'exists' takes a variable and a body");
                    }
                    let Sexp::Atom(name, vpos) = &args[0] else {
                        return perr(args[0].pos(), "expected a bound variable");
                    };
                    let Some(slot) = parse_binder(name, style) else {
                        return perr(*vpos, format!("bad bound variable '{name}'"));
                    };
                    Ok(Predicate::exists(slot, to_pred(&args[1], style)?))
                }
                other => match rel_of(other) {
                    Some(rel) => {
                        if args.len() != 2 {
                            return perr(*pos, format!("'{other}' takes two arguments"));
                        }
                        Ok(Predicate::Atom(to_term(&args[0], style)?, rel, to_term(&args[1], style)?))
                    }
                    None => perr(*pos, format!("unknown predicate operator '{other}'")),
                },
            }
        }
    }
}

fn to_term(e: &Sexp, style: VarStyle) -> Result<Term> {
    match e {
        Sexp::Atom(a, pos) => {
            if let Ok(v) = a.parse::<i64>() {
                return Ok(Term::Const(v));
            }
            match parse_var(a, style) {
                Some(v) => Ok(Term::Var(v)),
                None => perr(*pos, format!("expected a term, found '{a}'")),
            }
        }
        Sexp::List(items, pos) => {
            let Some(Sexp::Atom(op, _)) = items.first() else {
                return perr(*pos, "expected an operator");
            };
            let args = &items[1..];
            let terms = || args.iter().map(|a| to_term(a, style)).collect::<Result<Vec<_>>>();
            match op.as_str() {
                "+" => {
                    let ts = terms()?;
                    let mut it = ts.into_iter();
                    let Some(first) = it.next() else {
                        return Ok(Term::Const(0));
                    };
                    Ok(it.fold(first, |a, b| a + b))
                }
                "-" => {
                    let ts = terms()?;
                    let mut it = ts.into_iter();
                    let Some(first) = it.next() else {
                        return perr(*pos, "'-' needs an argument");
                    };
                    if args.len() == 1 {
                        return Ok(Term::scale(-1, first));
                    }
                    Ok(it.fold(first, |a, b| a - b))
                }
                "*" => {
                    if args.len() != 2 {
                        return perr(*pos, "'*' takes two arguments");
                    }
                    match (to_term(&args[0], style)?, to_term(&args[1], style)?) {
                        (Term::Const(k), t) | (t, Term::Const(k)) => Ok(Term::scale(k, t)),
                        _ => perr(*pos, "nonlinear multiplication"),
                    }
                }
                "ite" => {
                    if args.len() != 3 {
                        return perr(*pos, "'ite' takes three arguments");
                    }
                    let c = to_pred(&args[0], style)?;
                    if !c.is_quantifier_free() {
                        return perr(args[0].pos(), "if-then-else condition must be quantifier-free");
                    }
                    Ok(Term::ite(c, to_term(&args[1], style)?, to_term(&args[2], style)?))
                }
                other => perr(*pos, format!("unknown term operator '{other}'")),
            }
        }
    }
}

pub fn parse_predicate(src: &str, style: VarStyle) -> Result<Predicate> {
    to_pred(&read(src)?, style)
}

pub fn parse_term(src: &str, style: VarStyle) -> Result<Term> {
    to_term(&read(src)?, style)
}

fn var_name(v: Var, style: VarStyle) -> String {
    match style {
        VarStyle::StateEvent if v.param == 1 => format!("y{}", v.comp),
        _ => {
            let i = match style {
                VarStyle::Plain => v.param,
                VarStyle::StateEvent => v.param - 1,
            };
            if v.comp == 1 {
                format!("x{i}")
            } else {
                format!("x{i}.{}", v.comp)
            }
        }
    }
}

fn binder_name(slot: usize, style: VarStyle) -> String {
    match style {
        VarStyle::Plain => format!("x{slot}"),
        VarStyle::StateEvent if slot == 1 => "y".into(),
        VarStyle::StateEvent => format!("x{}", slot - 1),
    }
}

fn write_term(t: &Term, style: VarStyle, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(&var_name(*v, style)),
        Term::Const(c) => out.push_str(&c.to_string()),
        Term::Sum(..) | Term::Diff(..) => {
            let (op, mut spine) = (if matches!(t, Term::Sum(..)) { "+" } else { "-" }, Vec::new());
            let mut cur = t;
            while let ("+", Term::Sum(a, b)) | ("-", Term::Diff(a, b)) = (op, cur) {
                spine.push(&**b);
                cur = a;
            }
            spine.push(cur);
            out.push('(');
            out.push_str(op);
            for s in spine.iter().rev() {
                out.push(' ');
                write_term(s, style, out);
            }
            out.push(')');
        }
        Term::Scale(k, a) => {
            out.push_str(&format!("(* {k} "));
            write_term(a, style, out);
            out.push(')');
        }
        Term::Ite(c, a, b) => {
            out.push_str("(ite ");
            write_pred(c, style, out);
            out.push(' ');
            write_term(a, style, out);
            out.push(' ');
            write_term(b, style, out);
            out.push(')');
        }
    }
}

fn write_pred(p: &Predicate, style: VarStyle, out: &mut String) {
    match p {
        Predicate::True => out.push_str("true"),
        Predicate::False => out.push_str("false"),
        Predicate::Atom(a, r, b) => {
            out.push('(');
            out.push_str(r.symbol());
            out.push(' ');
            write_term(a, style, out);
            out.push(' ');
            write_term(b, style, out);
            out.push(')');
        }
        Predicate::Not(q) => {
            out.push_str("(not ");
            write_pred(q, style, out);
            out.push(')');
        }
        Predicate::And(..) | Predicate::Or(..) => {
            let is_and = matches!(p, Predicate::And(..));
            let mut spine = Vec::new();
            let mut cur = p;
            while let (true, Predicate::And(a, b)) | (false, Predicate::Or(a, b)) = (is_and, cur) {
                spine.push(&**b);
                cur = a;
            }
            spine.push(cur);
            out.push_str(if is_and { "(and" } else { "(or" });
            for s in spine.iter().rev() {
                out.push(' ');
                write_pred(s, style, out);
            }
            out.push(')');
        }
        Predicate::Exists(s, body) => {
            out.push_str("(exists ");
            out.push_str(&binder_name(*s, style));
            out.push(' ');
            write_pred(body, style, out);
            out.push(')');
        }
    }
}

pub(crate) fn print_predicate(p: &Predicate, style: VarStyle) -> String {
    let mut out = String::new();
    write_pred(p, style, &mut out);
    out
}

pub(crate) fn print_term(t: &Term, style: VarStyle) -> String {
    let mut out = String::new();
    write_term(t, style, &mut out);
    out
}

/// Minimal reader shared with the SMT-LIB response parser.
pub(crate) fn read_values(src: &str) -> Result<Vec<(String, i64)>> {
    fn value(e: &Sexp) -> Option<i64> {
        match e {
            Sexp::Atom(a, _) => a.parse().ok(),
            Sexp::List(items, _) => match items.as_slice() {
                [Sexp::Atom(op, _), inner] if op == "-" => value(inner).map(|v| -v),
                _ => None,
            },
        }
    }
    let Sexp::List(pairs, _) = read(src)? else {
        return perr(0, "expected a value list");
    };
    let mut out = Vec::new();
    for p in &pairs {
        match p {
            Sexp::List(kv, pos) if kv.len() == 2 => match (&kv[0], value(&kv[1])) {
                (Sexp::Atom(name, _), Some(v)) => out.push((name.clone(), v)),
                _ => return perr(*pos, "unexpected value entry"),
            },
            other => return perr(other.pos(), "unexpected value entry"),
        }
    }
    Ok(out)
}
