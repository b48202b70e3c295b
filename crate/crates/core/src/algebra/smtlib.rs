use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use super::{DomainKind, DomainSpec, Predicate, Rel, SatResult, Signature, Term};
use crate::{Error, Result};

fn name(slot: usize, comp: usize) -> String {
    format!("x{slot}_{comp}")
}

fn int(v: i64) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

fn domain_constraints(slot: usize, d: &DomainSpec, out: &mut Vec<String>) {
    for c in 1..=d.width {
        let n = name(slot, c);
        match d.kind {
            DomainKind::Naturals => out.push(format!("(>= {n} 0)")),
            DomainKind::Integers => {}
            DomainKind::Bounded(lo, hi) => out.push(format!("(<= {} {n} {})", int(lo), int(hi))),
        }
    }
}

fn term(t: &Term, out: &mut String, sig: &Signature) {
    match t {
        Term::Var(v) => out.push_str(&name(v.param, v.comp)),
        Term::Const(c) => out.push_str(&int(*c)),
        Term::Sum(a, b) | Term::Diff(a, b) => {
            out.push_str(if matches!(t, Term::Sum(..)) { "(+ " } else { "(- " });
            term(a, out, sig);
            out.push(' ');
            term(b, out, sig);
            out.push(')');
        }
        Term::Scale(k, a) => {
            out.push_str(&format!("(* {} ", int(*k)));
            term(a, out, sig);
            out.push(')');
        }
        Term::Ite(c, a, b) => {
            out.push_str("(ite ");
            pred(c, out, sig);
            out.push(' ');
            term(a, out, sig);
            out.push(' ');
            term(b, out, sig);
            out.push(')');
        }
    }
}

fn pred(p: &Predicate, out: &mut String, sig: &Signature) {
    match p {
        Predicate::True => out.push_str("true"),
        Predicate::False => out.push_str("false"),
        Predicate::Atom(a, r, b) => {
            out.push_str(match r {
                Rel::Ne => "(not (= ",
                _ => "(",
            });
            if *r != Rel::Ne {
                out.push_str(r.symbol());
                out.push(' ');
            }
            term(a, out, sig);
            out.push(' ');
            term(b, out, sig);
            out.push_str(if *r == Rel::Ne { "))" } else { ")" });
        }
        Predicate::Not(q) => {
            out.push_str("(not ");
            pred(q, out, sig);
            out.push(')');
        }
        Predicate::And(a, b) | Predicate::Or(a, b) => {
            out.push_str(if matches!(p, Predicate::And(..)) { "(and " } else { "(or " });
            pred(a, out, sig);
            out.push(' ');
            pred(b, out, sig);
            out.push(')');
        }
        Predicate::Exists(s, body) => {
            let d = sig.slot(*s);
            let decls: Vec<String> = (1..=d.width).map(|c| format!("({} Int)", name(*s, c))).collect();
            let mut guards = Vec::new();
            domain_constraints(*s, d, &mut guards);
            out.push_str(&format!("(exists ({}) (and", decls.join(" ")));
            for g in guards {
                out.push(' ');
                out.push_str(&g);
            }
            out.push(' ');
            pred(body, out, sig);
            out.push_str("))");
        }
    }
}

/// The SMT-LIB 2 query for `φ` over `sig`, without `(get-value ...)`.
pub fn script_for(p: &Predicate, sig: &Signature) -> String {
    let mut s = String::new();
    let logic = if p.is_quantifier_free() { "QF_LIA" } else { "LIA" };
    s.push_str(&format!("(set-logic {logic})\n"));
    let mut doms = Vec::new();
    for (i, d) in sig.slots().iter().enumerate() {
        for c in 1..=d.width {
            s.push_str(&format!("(declare-fun {} () Int)\n", name(i + 1, c)));
        }
        domain_constraints(i + 1, d, &mut doms);
    }
    for d in doms {
        s.push_str(&format!("(assert {d})\n"));
    }
    let mut body = String::new();
    pred(p, &mut body, sig);
    s.push_str(&format!("(assert {body})\n(check-sat)\n"));
    s
}

/// A persistent solver child process speaking SMT-LIB 2 over pipes.
pub struct SmtSession {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    timeout: Duration,
}

impl SmtSession {
    pub fn spawn(command: &str, timeout_ms: u64) -> Result<Self> {
        let mut parts = command.split_whitespace();
        let prog = parts.next().ok_or_else(|| Error::SolverUnavailable("empty solver command".into()))?;
        let mut child = Command::new(prog)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::SolverUnavailable(format!("{prog}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(SmtSession { child, stdin, lines: rx, timeout: Duration::from_millis(timeout_ms) })
    }

    fn send(&mut self, text: &str) -> Result<()> {
        self.stdin
            .write_all(text.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::SolverProtocol(format!("write failed: {e}")))
    }

    fn line(&mut self) -> Result<String> {
        loop {
            match self.lines.recv_timeout(self.timeout) {
                Ok(l) if l.trim().is_empty() => continue,
                Ok(l) => return Ok(l),
                Err(RecvTimeoutError::Timeout) => {
                    let _ = self.child.kill();
                    return Err(Error::SolverTimeout(self.timeout.as_millis() as u64));
                }
                Err(RecvTimeoutError::Disconnected) => return Err(Error::SolverProtocol("solver closed its output".into())),
            }
        }
    }

    /// Reads one balanced s-expression response (possibly multi-line).
    fn response(&mut self) -> Result<String> {
        let mut buf = self.line()?;
        let depth = |s: &str| s.matches('(').count() as i64 - s.matches(')').count() as i64;
        while depth(&buf) > 0 {
            buf.push(' ');
            buf.push_str(&self.line()?);
        }
        Ok(buf)
    }

    pub fn check(&mut self, p: &Predicate, sig: &Signature) -> Result<SatResult> {
        let script = format!("(reset)\n{}", script_for(p, sig));
        self.send(&script)?;
        let answer = self.response()?;
        match answer.trim() {
            "unsat" => Ok(SatResult { sat: false, exact: true, witness: None }),
            "sat" => {
                let names: Vec<String> =
                    sig.slots().iter().enumerate().flat_map(|(i, d)| (1..=d.width).map(move |c| name(i + 1, c))).collect();
                if names.is_empty() {
                    return Ok(SatResult { sat: true, exact: true, witness: Some(Vec::new()) });
                }
                self.send(&format!("(get-value ({}))\n", names.join(" ")))?;
                let resp = self.response()?;
                let values = super::sexpr::read_values(&resp).map_err(|e| Error::SolverProtocol(format!("bad model '{resp}': {e}")))?;
                let mut witness = Vec::with_capacity(names.len());
                for n in &names {
                    let v = values.iter().find(|(k, _)| k == n).ok_or_else(|| Error::SolverProtocol(format!("no value for {n}")))?;
                    witness.push(v.1);
                }
                Ok(SatResult { sat: true, exact: true, witness: Some(witness) })
            }
            other => Err(Error::SolverProtocol(format!("unexpected answer '{other}'"))),
        }
    }
}

impl Drop for SmtSession {
    fn drop(&mut self) {
        let _ = self.send("(exit)\n");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
