//! Two-counter machines and their encoding as a four-state EFA whose final
//! state is reachable exactly when the machine halts.

use std::fmt;
use std::str::FromStr;

use super::{Efa, Update};
use crate::algebra::{shift_slots, DomainSpec, Predicate, Term};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instr {
    Inc(u8),
    Dec(u8),
    /// Jump to the given (1-based) instruction if the register is zero.
    Jz(u8, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub instrs: Vec<Instr>,
}

impl Program {
    pub fn new(instrs: Vec<Instr>) -> Result<Self> {
        let p = Program { instrs };
        p.validate()?;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.instrs.len();
        for (i, ins) in self.instrs.iter().enumerate() {
            let (r, z) = match *ins {
                Instr::Inc(r) | Instr::Dec(r) => (r, 1),
                Instr::Jz(r, z) => (r, z),
            };
            if r != 1 && r != 2 {
                return Err(Error::InvalidModel(format!("instruction {}: register must be r1 or r2", i + 1)));
            }
            if z == 0 || z > n + 1 {
                return Err(Error::InvalidModel(format!("instruction {}: jump target {z} outside [1:{}]", i + 1, n + 1)));
            }
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = Error;

    /// One instruction per line: `INC r1`, `DEC r2`, `JZ r1 5`. Blank lines
    /// and `#` comments are ignored.
    fn from_str(src: &str) -> Result<Self> {
        let mut instrs = Vec::new();
        for (ln, line) in src.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse { pos: ln + 1, msg: format!("line {}: {msg}: '{line}'", ln + 1) };
            let words: Vec<&str> = line.split_whitespace().collect();
            let reg = |w: Option<&&str>| -> Result<u8> {
                match w.map(|s| s.to_ascii_lowercase()).as_deref() {
                    Some("r1") => Ok(1),
                    Some("r2") => Ok(2),
                    _ => Err(bad("expected register r1 or r2")),
                }
            };
            let ins = match words[0].to_ascii_uppercase().as_str() {
                "INC" if words.len() == 2 => Instr::Inc(reg(words.get(1))?),
                "DEC" if words.len() == 2 => Instr::Dec(reg(words.get(1))?),
                "JZ" if words.len() == 3 => {
                    let z = words[2].parse().map_err(|_| bad("bad jump target"))?;
                    Instr::Jz(reg(words.get(1))?, z)
                }
                _ => return Err(bad("unknown instruction")),
            };
            instrs.push(ins);
        }
        Program::new(instrs)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instrs {
            match ins {
                Instr::Inc(r) => writeln!(f, "INC r{r}")?,
                Instr::Dec(r) => writeln!(f, "DEC r{r}")?,
                Instr::Jz(r, z) => writeln!(f, "JZ r{r} {z}")?,
            }
        }
        Ok(())
    }
}

/// Registers and program counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConregistrationCm {
    pub r1: i64,
    pub r2: i64,
    pub c: i64,
}

impl ConregistrationCm {
    pub fn start() -> Self {
        ConregistrationCm { r1: 0, r2: 0, c: 1 }
    }

    pub fn to_vec(self) -> Vec<i64> {
        vec![self.r1, self.r2, self.c]
    }

    fn reg(&self, r: u8) -> i64 {
        if r == 1 {
            self.r1
        } else {
            self.r2
        }
    }

    fn reg_mut(&mut self, r: u8) -> &mut i64 {
        if r == 1 {
            &mut self.r1
        } else {
            &mut self.r2
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// The counter left the program after this many steps.
    Halted(usize),
    /// Still running after the step budget.
    Running,
    /// A decrement of a zero register after this many steps.
    Blocked(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub status: RunStatus,
    /// Every configuration visited, starting with the initial one.
    pub configs: Vec<ConregistrationCm>,
}

impl Trace {
    /// Largest register or counter value seen.
    pub fn max_value(&self) -> i64 {
        self.configs.iter().map(|c| c.r1.max(c.r2).max(c.c)).max().unwrap_or(0)
    }
}

pub fn run_2cm(p: &Program, init: ConregistrationCm, max_steps: usize) -> Trace {
    let n = p.len() as i64;
    let mut cur = init;
    let mut configs = vec![cur];
    for step in 0..=max_steps {
        if !(1..=n).contains(&cur.c) {
            return Trace { status: RunStatus::Halted(step), configs };
        }
        if step == max_steps {
            break;
        }
        match p.instrs[(cur.c - 1) as usize] {
            Instr::Inc(r) => {
                *cur.reg_mut(r) += 1;
                cur.c += 1;
            }
            Instr::Dec(r) => {
                if cur.reg(r) == 0 {
                    return Trace { status: RunStatus::Blocked(step), configs };
                }
                *cur.reg_mut(r) -= 1;
                cur.c += 1;
            }
            Instr::Jz(r, z) => cur.c = if cur.reg(r) == 0 { z as i64 } else { cur.c + 1 },
        }
        configs.push(cur);
    }
    Trace { status: RunStatus::Running, configs }
}

// Configuration components: slot 1 is the current (`y`), slot 2 the next (`x`).
fn y(j: usize) -> Term {
    Term::comp(1, j)
}

fn x(j: usize) -> Term {
    Term::comp(2, j)
}

fn phi_instr(i: usize, ins: Instr) -> Predicate {
    let i = i as i64;
    match ins {
        Instr::Inc(r) | Instr::Dec(r) => {
            let j = r as usize;
            let delta = if matches!(ins, Instr::Inc(_)) { y(j) + Term::c(1) } else { y(j) - Term::c(1) };
            Predicate::conj([x(j).equals(delta), x(3 - j).equals(y(3 - j)), y(3).equals(Term::c(i)), x(3).equals(Term::c(i + 1))])
        }
        Instr::Jz(r, z) => Predicate::conj([
            x(1).equals(y(1)),
            x(2).equals(y(2)),
            y(3).equals(Term::c(i)),
            x(3).equals(Term::ite(y(r as usize).equals(Term::c(0)), Term::c(z as i64), Term::c(i + 1))),
        ]),
    }
}

/// One-instruction configuration step relation (current in slot 1, next in slot 2).
pub fn phi_step(p: &Program) -> Predicate {
    Predicate::disj(p.instrs.iter().enumerate().map(|(i, &ins)| phi_instr(i + 1, ins)))
}

/// Component-wise equality of the two configurations.
pub fn phi_eq() -> Predicate {
    Predicate::conj((1..=3).map(|j| x(j).equals(y(j))))
}

/// Default initial configuration predicate (arity 1): `(0, 0, 1)`.
pub fn default_ini() -> Predicate {
    let v = |j| Term::comp(1, j);
    Predicate::conj([v(1).equals(Term::c(0)), v(2).equals(Term::c(0)), v(3).equals(Term::c(1))])
}

/// Default final configuration predicate (arity 1): counter at `|P| + 1`.
pub fn default_fin(p: &Program) -> Predicate {
    Term::comp(1, 3).equals(Term::c(p.len() as i64 + 1))
}

pub fn encode_2cm(p: &Program, fin: Option<Predicate>) -> Efa {
    encode_2cm_with(p, None, fin)
}

/// The encoding with optional initial and final configuration predicates
/// (both of arity 1 over a configuration).
pub fn encode_2cm_with(p: &Program, ini: Option<Predicate>, fin: Option<Predicate>) -> Efa {
    let n3 = DomainSpec::naturals(3);
    let ini = ini.unwrap_or_else(default_ini);
    let fin = shift_slots(&fin.unwrap_or_else(|| default_fin(p)), 1);
    let mut e = Efa::new(n3, n3).with_states(["q0", "q1", "q2", "q3"]).with_initial(["q0"]);
    e.tags = ["sigma1", "sigma2", "sigma3", "sigma4"].map(String::from).to_vec();
    e.y0 = ini.clone();
    let sto = Update::store(3);
    e.push_transition("t1", "q0", "sigma1", 1, shift_slots(&ini, 1), sto.clone(), "q1");
    e.push_transition("t2", "q1", "sigma2", 1, phi_step(p), sto.clone(), "q2");
    e.push_transition("t3", "q2", "sigma3", 1, fin.clone().not().and(phi_eq()), sto, "q1");
    e.push_transition("t4", "q2", "sigma3", 1, fin.and(phi_eq()), Update::Keep, "q3");
    e
}
