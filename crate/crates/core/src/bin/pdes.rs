use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pdes_opacity::algebra::{Backend, Predicate, SolverConfig};
use pdes_opacity::efa::{bounded_reach, embed_ep_efa, encode_2cm_with, flatten_step_length, Efa, Program};
use pdes_opacity::model::{EpEfa, Event, ObservationSpec, StateSet};
use pdes_opacity::observer::build_observer;
use pdes_opacity::opacity::{check, OpacityQuery, Property};
use pdes_opacity::oracle::{oracle_check, selftest, OracleWindow};
use pdes_opacity::{Error, Result};

#[derive(Parser)]
#[command(name = "pdes", version, about = "Opacity verification for parameterized discrete event systems")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Satisfiability backend.
    #[arg(long, global = true, default_value = "enumerate", value_parser = parse_backend)]
    solver: Backend,
    /// Enumeration bound for unbounded domains.
    #[arg(long, global = true, default_value_t = 40)]
    bound: i64,
    /// External solver command (defaults to $PDES_SOLVER or "z3 -in").
    #[arg(long, global = true)]
    solver_cmd: Option<String>,
    #[arg(long, global = true, default_value_t = 10_000)]
    timeout_ms: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Dot,
    Json,
}

#[derive(Args)]
struct QueryArgs {
    /// cso, iso or inf.
    #[arg(long, value_parser = parse_property)]
    property: Property,
    /// Comma-separated secret states.
    #[arg(long, value_delimiter = ',')]
    secret: Vec<String>,
    /// Comma-separated non-secret states (default: the complement of the
    /// secret within all states, or within the initial states for iso).
    #[arg(long, value_delimiter = ',')]
    nonsecret: Option<Vec<String>>,
    /// Observability condition on one data element.
    #[arg(long, default_value = "true")]
    theta: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide an opacity property (exit 0 opaque, 1 not opaque, 2 error).
    Check {
        model: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Build the symbolic observer.
    Observer {
        model: PathBuf,
        #[arg(long, default_value = "true")]
        theta: String,
        /// Observer of the reverse model.
        #[arg(long)]
        reverse: bool,
        #[arg(long, value_enum, default_value_t = Emit::Dot)]
        emit: Emit,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Brute-force window check, or `oracle selftest`.
    #[command(args_conflicts_with_subcommands = true)]
    Oracle {
        #[command(subcommand)]
        sub: Option<OracleCmd>,
        model: Option<PathBuf>,
        #[command(flatten)]
        query: Option<QueryArgs>,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Encode a two-counter machine program as an EFA.
    #[command(name = "encode-2cm")]
    Encode2cm {
        program: PathBuf,
        /// Initial configuration predicate over x1.1..x1.3 (default (0,0,1)).
        #[arg(long)]
        ini: Option<String>,
        /// Final configuration predicate (default: counter past the program).
        #[arg(long)]
        fin: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bounded reachability in an EFA (exit 0 reachable, 1 not, 2 error).
    Reach {
        efa: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<String>,
        #[arg(long)]
        depth: usize,
    },
    /// Run an event string, printing reached states step by step.
    Simulate {
        model: PathBuf,
        /// Space-separated events such as "sigma2(6,5) sigma4(3)".
        #[arg(long)]
        events: String,
        /// Start states (default: initial states).
        #[arg(long, value_delimiter = ',')]
        from: Option<Vec<String>>,
    },
    /// Reduce step length to one (EP-EFA inputs are embedded first).
    Flatten {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// View an EP-EFA as an EFA.
    Embed {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reverse an EP-EFA.
    Reverse {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Observer, verifiers and oracle on seeded random models.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        models: usize,
        #[arg(long, default_value_t = 3)]
        max_units: usize,
    },
}

#[derive(Args)]
struct WindowArgs {
    #[arg(long, default_value_t = 0)]
    lo: i64,
    #[arg(long, default_value_t = 7)]
    hi: i64,
    /// Maximum number of observable units.
    #[arg(long, default_value_t = 3)]
    max_units: usize,
}

fn parse_backend(s: &str) -> std::result::Result<Backend, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_property(s: &str) -> std::result::Result<Property, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Global {
    fn solver(&self) -> SolverConfig {
        let mut cfg =
            SolverConfig { backend: self.solver, enumeration_bound: self.bound, timeout_ms: self.timeout_ms, ..Default::default() };
        if let Some(c) = &self.solver_cmd {
            cfg.solver_command = c.clone();
        }
        cfg
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_out(output: &Option<PathBuf>, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match output {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

enum Loaded {
    Ep(EpEfa),
    Efa(Efa),
}

fn load(path: &Path) -> Result<Loaded> {
    let src = read(path)?;
    let v: serde_json::Value = serde_json::from_str(&src)?;
    if v.get("state_domain").is_some() {
        Ok(Loaded::Efa(Efa::from_json(&src)?))
    } else {
        Ok(Loaded::Ep(EpEfa::from_json(&src)?))
    }
}

fn load_ep(path: &Path) -> Result<EpEfa> {
    match load(path)? {
        Loaded::Ep(s) => Ok(s),
        Loaded::Efa(_) => Err(Error::InvalidModel(format!("{}: expected an EP-EFA, found an EFA", path.display()))),
    }
}

fn query(s: &EpEfa, q: &QueryArgs) -> Result<OpacityQuery> {
    let secret = s.state_set(&q.secret)?;
    let nonsecret = match &q.nonsecret {
        Some(ns) => s.state_set(ns)?,
        None => {
            let pool = if q.property == Property::InitialState { s.initial.clone() } else { s.all_states() };
            pool.difference(&secret).copied().collect()
        }
    };
    Ok(OpacityQuery::new(q.property, secret, nonsecret, ObservationSpec::parse(&q.theta)?))
}

fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    let cfg = g.solver();
    let json_out = g.format == Format::Json;
    match cli.cmd {
        Cmd::Check { model, query: qa } => {
            let s = load_ep(&model)?;
            let q = query(&s, &qa)?;
            let v = check(&s, &q, &cfg)?;
            if json_out {
                println!("{}", v.to_json());
            } else {
                println!("{v}");
            }
            Ok(if v.opaque { 0 } else { 1 })
        }
        Cmd::Observer { model, theta, reverse, emit, output } => {
            let mut s = load_ep(&model)?;
            if reverse {
                s = s.reverse();
            }
            let obs = build_observer(&s, &ObservationSpec::parse(&theta)?, &cfg)?;
            let text = match emit {
                Emit::Dot => obs.to_dot(),
                Emit::Json => serde_json::to_string_pretty(&obs.to_json())?,
            };
            write_out(&output, &text)?;
            Ok(0)
        }
        Cmd::Oracle { sub: Some(OracleCmd::Selftest { seed, models, max_units }), .. } => {
            let r = selftest(seed, models, max_units, &cfg)?;
            if json_out {
                println!("{}", r.to_json());
            } else {
                println!("{r}");
            }
            Ok(if r.agree() { 0 } else { 1 })
        }
        Cmd::Oracle { sub: None, model, query: qa, window } => {
            let model = model.ok_or_else(|| Error::InvalidQuery("oracle needs a model path or `selftest`".into()))?;
            let qa = qa.ok_or_else(|| Error::InvalidQuery("oracle needs --property".into()))?;
            let s = load_ep(&model)?;
            let q = query(&s, &qa)?;
            q.validate(&s)?;
            let w = OracleWindow::range(&s, window.lo, window.hi, window.max_units)?;
            let v = oracle_check(&s, &q, &w)?;
            if json_out {
                println!("{}", v.to_json());
            } else {
                println!("{v}");
            }
            Ok(if v.violated { 1 } else { 0 })
        }
        Cmd::Encode2cm { program, ini, fin, output } => {
            let p: Program = read(&program)?.parse()?;
            let ini = ini.map(|s| s.parse::<Predicate>()).transpose()?;
            let fin = fin.map(|s| s.parse::<Predicate>()).transpose()?;
            write_out(&output, &encode_2cm_with(&p, ini, fin).to_json())?;
            Ok(0)
        }
        Cmd::Reach { efa, target, depth } => {
            let e = match load(&efa)? {
                Loaded::Efa(e) => e,
                Loaded::Ep(s) => embed_ep_efa(&s),
            };
            let r = bounded_reach(&e, &e.state_set(&target)?, depth, &cfg)?;
            if json_out {
                let mut v = json!({ "reachable": r.reachable, "depth": r.depth, "sequences": r.sequences });
                if let Some(w) = &r.witness {
                    v["witness"] = json!({
                        "transitions": w.transitions,
                        "states": w.states,
                        "events": w.events.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                        "params": w.params,
                        "data": w.data_string().0,
                    });
                }
                println!("{v}");
            } else {
                println!("{r}");
            }
            Ok(if r.reachable { 0 } else { 1 })
        }
        Cmd::Simulate { model, events, from } => {
            let u = Event::parse_list(&events)?;
            match load(&model)? {
                Loaded::Ep(s) => {
                    let mut cur: StateSet = match &from {
                        Some(f) => s.state_set(f)?,
                        None => s.initial.clone(),
                    };
                    let mut steps = vec![s.names(&cur)];
                    for e in &u {
                        cur = s.run(&cur, std::slice::from_ref(e))?;
                        steps.push(s.names(&cur));
                    }
                    if json_out {
                        println!("{}", json!({ "steps": steps }));
                    } else {
                        println!("start: {{{}}}", steps[0].join(","));
                        for (e, st) in u.iter().zip(&steps[1..]) {
                            println!("{e}: {{{}}}", st.join(","));
                        }
                    }
                }
                Loaded::Efa(e) => {
                    let starts: StateSet = match &from {
                        Some(f) => e.state_set(f)?,
                        None => e.initial.clone(),
                    };
                    let ys = e.initial_params(cfg.enumeration_bound)?;
                    let mut cur: BTreeSet<(usize, Vec<i64>)> =
                        starts.iter().flat_map(|&q| ys.iter().map(move |y| (q, y.clone()))).collect();
                    let show = |c: &BTreeSet<(usize, Vec<i64>)>| -> Vec<String> {
                        c.iter().map(|(q, y)| format!("{}{:?}", e.states[*q], y)).collect()
                    };
                    let mut steps = vec![show(&cur)];
                    for ev in &u {
                        cur = e.run(&cur, std::slice::from_ref(ev))?;
                        steps.push(show(&cur));
                    }
                    if json_out {
                        println!("{}", json!({ "steps": steps }));
                    } else {
                        println!("start: {{{}}}", steps[0].join(","));
                        for (ev, st) in u.iter().zip(&steps[1..]) {
                            println!("{ev}: {{{}}}", st.join(","));
                        }
                    }
                }
            }
            Ok(0)
        }
        Cmd::Flatten { model, output } => {
            let e = match load(&model)? {
                Loaded::Efa(e) => e,
                Loaded::Ep(s) => embed_ep_efa(&s),
            };
            write_out(&output, &flatten_step_length(&e).to_json())?;
            Ok(0)
        }
        Cmd::Embed { model, output } => {
            write_out(&output, &embed_ep_efa(&load_ep(&model)?).to_json())?;
            Ok(0)
        }
        Cmd::Reverse { model, output } => {
            write_out(&output, &load_ep(&model)?.reverse().to_json())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global();
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
