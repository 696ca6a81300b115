//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::eval::{EvalError, Interp, LineSource, Store};
use crate::rules::render::{defrule_latex, defrule_text};
use crate::rules::Engine;
use crate::session::{describe, line_col, Session};
use crate::specializer::{rule_text, Specializer};
use crate::stdlib::{definition_body, rule_env};
use crate::syntax::{desugar, parse_expression, parse_program, parse_signature, Apply, DesugarError, Expr, SigEnv, Signature};

#[derive(Debug, Parser)]
#[command(name = "howard", version, about = "Run programs and derive rules for signature-driven operations")]
pub struct Cli {
    /// Start fresh-name counters here.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Step budget (also `HOWARD_FUEL`).
    #[arg(long, global = true)]
    pub fuel: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a program and print its value.
    Run { file: PathBuf },
    /// Read-eval-print loop.
    Repl {
        #[arg(long)]
        load: Option<PathBuf>,
    },
    /// Print the rule for applications of an operation.
    Defrule {
        name: String,
        #[arg(long)]
        latex: bool,
        #[arg(long)]
        load: Option<PathBuf>,
    },
    /// Derive an application rule from a definition body.
    Specialize {
        name: String,
        /// Reduce this application with the derived rule.
        #[arg(long)]
        call: Option<String>,
        #[arg(long)]
        load: Option<PathBuf>,
    },
    /// Type-check a program.
    Check {
        file: PathBuf,
        #[arg(long)]
        dump_types: bool,
    },
}

pub struct Io {
    pub input: Box<dyn LineSource>,
    pub sink: Option<Box<dyn Write>>,
    /// Write each input line after its prompt.
    pub echo: bool,
}

pub struct Outcome {
    pub code: i32,
    /// Everything written to standard output.
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: String) -> Failure {
        Failure { code: 2, message }
    }

    fn error(message: String) -> Failure {
        Failure { code: 1, message }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn fuel(cli: &Cli) -> Option<u64> {
    cli.fuel.or_else(|| std::env::var("HOWARD_FUEL").ok()?.parse().ok())
}

pub fn execute(cli: &Cli, io: Io) -> Outcome {
    let store = match io.sink {
        Some(s) => Store::with_sink(s),
        None => Store::default(),
    };
    let mut interp = Interp::new(store).with_input(io.input);
    interp.echo = io.echo;
    if let Some(f) = fuel(cli) {
        interp.fuel = f;
    }
    let mut session = Session::new(interp);
    let r = dispatch(cli, &mut session);
    let stdout = std::mem::take(&mut session.interp.store.transcript);
    match r {
        Ok(()) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(f) => Outcome { code: f.code, stdout, stderr: format!("{}\n", f.message) },
    }
}

fn load(session: &mut Session, path: &Path) -> Result<Option<crate::eval::Value>, Failure> {
    let src = read(path)?;
    session.load(&src).map_err(|e| Failure::error(format!("{}: {}", path.display(), describe(&src, &e))))
}

fn out(session: &mut Session, text: &str) -> Result<(), Failure> {
    session.interp.write(text).map_err(|e| Failure::error(e.to_string()))
}

fn dispatch(cli: &Cli, session: &mut Session) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { file } => {
            if let Some(v) = load(session, file)? {
                if v.is_shown() {
                    out(session, &format!("{v}\n"))?;
                }
            }
            Ok(())
        }
        Command::Repl { load: file } => {
            if let Some(f) = file {
                load(session, f)?;
            }
            session.repl().map_err(|e| Failure::error(e.to_string()))
        }
        Command::Check { file, dump_types } => {
            let src = read(file)?;
            let apps = session.check(&src).map_err(|e| Failure::error(format!("{}: {}", file.display(), describe(&src, &e))))?;
            if *dump_types {
                for a in apps {
                    let (l, c) = line_col(&src, a.pos);
                    let params: Vec<String> = a.params.iter().map(|(n, t)| format!("{n}={t}")).collect();
                    out(session, &format!("{l}:{c} {}: {}\n", a.head, params.join(", ")))?;
                }
            }
            Ok(())
        }
        Command::Defrule { name, latex, load: file } => {
            let src = match file {
                Some(f) => {
                    load(session, f)?;
                    read(f)?
                }
                None => String::new(),
            };
            let sig = match session.env.operation(name) {
                Some(op) => (*op.sig).clone(),
                None => local_def(&src, name).map(|(s, _)| s).ok_or_else(|| Failure::error(format!("unknown operation `{name}`")))?,
            };
            let mut engine = Engine::with_seed(cli.seed);
            let (rule, _) = engine.rules.application_rule(&sig, sig.has_by_value());
            let text = if *latex { defrule_latex(&sig, &rule) } else { defrule_text(&sig, &rule) };
            out(session, &text)
        }
        Command::Specialize { name, call, load: file } => {
            let src = match file {
                Some(f) => {
                    let src = read(f)?;
                    load(session, f)?;
                    src
                }
                None => String::new(),
            };
            specialize(cli, session, name, call.as_deref(), &src)
        }
    }
}

fn specialize(cli: &Cli, session: &mut Session, name: &str, call: Option<&str>, src: &str) -> Result<(), Failure> {
    let (k, sig, body) = match session.defs.iter().rposition(|(s, _)| s.name == name) {
        Some(k) => (k, session.defs[k].0.clone(), session.defs[k].1.clone()),
        None => {
            let (sig, body) =
                local_def(src, name).ok_or_else(|| Failure::error(format!("`{name}` has no definition to specialise")))?;
            let body = definition_body(&session.env, &sig, &body).map_err(|e| Failure::error(describe(src, &e)))?;
            (session.defs.len(), sig, body)
        }
    };
    let mut engine = Engine::with_seed(cli.seed);
    if let Some(f) = fuel(cli) {
        engine.fuel = f;
    }
    let env = rule_env(&mut engine, &session.defs[..k]);
    let mut sp = Specializer::new(engine, env);
    let (rule, trace) = sp.specialize(&sig, &body).map_err(|e| Failure::error(e.to_string()))?;
    for (n, (caption, r)) in trace.iter().enumerate() {
        out(session, &format!("{}. {caption}\n   {}\n", n + 1, rule_text(r)))?;
    }
    out(session, &format!("{}\n", rule_text(&rule)))?;
    let Some(call) = call else { return Ok(()) };
    let expr = application(name, call, src)?;
    let mut sigs = session.env.sig_env();
    sigs.bind_op(sig);
    let core = desugar_open(&expr, sigs)?;
    let m = sp.reduce_application(&rule, &core).map_err(|e| Failure::error(e.to_string()))?;
    match m.evaluate::<i64>() {
        Ok(v) => out(session, &format!("{m} = {v}\n")),
        Err(_) => out(session, &format!("{m}\n")),
    }
}

/// `call` as an application of `name`: either written out in full or as
/// the last argument of the first application of `name` in `src`.
fn application(name: &str, call: &str, src: &str) -> Result<Expr, Failure> {
    let e = parse_expression(call).map_err(|e| Failure::usage(format!("--call: {e}")))?;
    if matches!(&e, Expr::Apply(a) if a.op == name) {
        return Ok(e);
    }
    let members = parse_program(src).unwrap_or_default();
    let mut found = members.iter().find_map(|m| find_application(m, name)).ok_or_else(|| {
        Failure::usage(format!("no application of `{name}` to complete; pass the whole application to --call"))
    })?;
    let last = found.args.last_mut().ok_or_else(|| Failure::usage(format!("`{name}` takes no arguments")))?;
    last.body = e;
    Ok(Expr::Apply(found))
}

/// A `DEF` of `name` anywhere in `src`, body not yet desugared.
fn local_def(src: &str, name: &str) -> Option<(Signature, Expr)> {
    fn walk(e: &Expr, name: &str) -> Option<(Signature, Expr)> {
        match e {
            Expr::Def { sig, body, .. } if sig.name == name => Some((sig.clone(), (**body).clone())),
            Expr::Def { body, app, .. } => walk(body, name).or_else(|| app.as_deref().and_then(|a| walk(a, name))),
            Expr::Apply(a) => a.args.iter().find_map(|x| walk(&x.body, name)),
            Expr::Seq(v) | Expr::Block(v) | Expr::List(v) => v.iter().find_map(|x| walk(x, name)),
            Expr::Infix { lhs, rhs, .. } => walk(lhs, name).or_else(|| walk(rhs, name)),
            Expr::Int(_) | Expr::Str(_) => None,
        }
    }
    parse_program(src).ok()?.iter().find_map(|m| walk(m, name))
}

fn find_application(e: &Expr, name: &str) -> Option<Apply> {
    match e {
        Expr::Apply(a) if a.op == name && !a.args.is_empty() => Some(a.clone()),
        Expr::Apply(a) => a.args.iter().find_map(|x| find_application(&x.body, name)),
        Expr::Seq(v) | Expr::Block(v) | Expr::List(v) => v.iter().find_map(|x| find_application(x, name)),
        Expr::Infix { lhs, rhs, .. } => find_application(lhs, name).or_else(|| find_application(rhs, name)),
        Expr::Def { body, app, .. } => find_application(body, name).or_else(|| app.as_deref().and_then(|a| find_application(a, name))),
        Expr::Int(_) | Expr::Str(_) => None,
    }
}

/// Desugar, reading unknown names as symbolic constants.
fn desugar_open(e: &Expr, mut sigs: SigEnv) -> Result<Expr, Failure> {
    loop {
        match desugar(e, &mut sigs.clone()) {
            Ok(core) => return Ok(core),
            Err(DesugarError::UnknownOperation { name, .. }) if sigs.lookup(&name).is_none() => {
                let sig = parse_signature(&name).map_err(|_| Failure::error(format!("unknown operation `{name}`")))?;
                sigs.bind_op(sig);
            }
            Err(e) => return Err(Failure::error(EvalError::from(e).to_string())),
        }
    }
}
