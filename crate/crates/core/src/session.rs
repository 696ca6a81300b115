//! A top-level session: declarations persist, other members are checked
//! and evaluated as they arrive.

use crate::eval::{Env, EvalError, Interp, Value};
use crate::stdlib::{self, definition_body, register_stdlib};
use crate::syntax::{desugar, parse_program, Expr, Signature};
use crate::types::{AppTypes, TypeError};

pub struct Session {
    pub env: Env,
    /// Every definition made so far, desugared, oldest first.
    pub defs: Vec<(Signature, Expr)>,
    pub interp: Interp,
    pub typecheck: bool,
}

/// One-based line and column of byte offset `pos` in `src`.
pub fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let before = &src[..pos.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
    (line, col)
}

fn type_pos(e: &TypeError) -> Option<usize> {
    match e {
        TypeError::TypeMismatch { pos, .. }
        | TypeError::UnresolvedTypeParam { pos, .. }
        | TypeError::UnknownOperator { pos, .. }
        | TypeError::AmbiguousOverload { pos, .. } => Some(*pos),
        TypeError::UnifyFailure { .. } => None,
    }
}

/// `err` with byte offsets replaced by `line:col`.
pub fn describe(src: &str, err: &EvalError) -> String {
    let text = err.to_string();
    let pos = match err {
        EvalError::Type(t) => type_pos(t),
        EvalError::Syntax(s) => Some(s.pos()),
        _ => None,
    };
    match pos {
        Some(p) => {
            let (l, c) = line_col(src, p);
            let raw = format!("at {p}:");
            if text.contains(&raw) {
                text.replacen(&raw, &format!("at {l}:{c}:"), 1)
            } else {
                format!("{l}:{c}: {text}")
            }
        }
        None => text,
    }
}

impl Session {
    pub fn new(interp: Interp) -> Session {
        let lib = register_stdlib(&Env::new());
        Session { env: lib.env, defs: lib.defs, interp, typecheck: true }
    }

    fn declare(&mut self, def: Expr) -> Result<(), EvalError> {
        let Expr::Def { sig, body, span, .. } = &def else { unreachable!() };
        let body = definition_body(&self.env, sig, body)?;
        if self.typecheck {
            let core = Expr::Def { sig: sig.clone(), body: Box::new(body.clone()), app: None, span: *span };
            stdlib::typer(&self.env).infer(&core)?;
        }
        self.env = self.env.define(sig.clone(), body.clone());
        self.defs.push((sig.clone(), body));
        Ok(())
    }

    fn core(&self, members: Vec<Expr>) -> Result<(Expr, Vec<AppTypes>), EvalError> {
        let mut sigs = self.env.sig_env();
        let core = desugar(&Expr::seq(members), &mut sigs)?;
        let apps = if self.typecheck { stdlib::typer(&self.env).infer(&core)?.apps } else { Vec::new() };
        Ok((core, apps))
    }

    /// Declarations and runs of other members, in source order.
    fn groups(src: &str) -> Result<Vec<Result<Expr, Vec<Expr>>>, EvalError> {
        let mut out = Vec::new();
        let mut run = Vec::new();
        for m in parse_program(src)? {
            if matches!(m, Expr::Def { app: None, .. }) {
                if !run.is_empty() {
                    out.push(Err(std::mem::take(&mut run)));
                }
                out.push(Ok(m));
            } else {
                run.push(m);
            }
        }
        if !run.is_empty() {
            out.push(Err(run));
        }
        Ok(out)
    }

    /// Run `src`; the value of the last evaluated member, if any.
    pub fn load(&mut self, src: &str) -> Result<Option<Value>, EvalError> {
        let mut last = None;
        for g in Self::groups(src)? {
            match g {
                Ok(def) => self.declare(def)?,
                Err(members) => {
                    let (core, _) = self.core(members)?;
                    last = Some(self.interp.eval(&core, &self.env)?);
                }
            }
        }
        Ok(last)
    }

    /// Type-check `src` without running it; solved type parameters of
    /// every application.
    pub fn check(&mut self, src: &str) -> Result<Vec<AppTypes>, EvalError> {
        let saved = (self.env.clone(), self.defs.len(), self.typecheck);
        self.typecheck = true;
        let mut apps = Vec::new();
        let r = (|| {
            for g in Self::groups(src)? {
                match g {
                    Ok(def) => self.declare(def)?,
                    Err(members) => apps.extend(self.core(members)?.1),
                }
            }
            Ok(())
        })();
        self.env = saved.0;
        self.defs.truncate(saved.1);
        self.typecheck = saved.2;
        r.map(|_| apps)
    }

    /// Read-eval-print until input ends.
    pub fn repl(&mut self) -> Result<(), EvalError> {
        while let Some(src) = self.interp.read_input(0) {
            match self.load(&src) {
                Ok(Some(v)) if v.is_shown() => self.interp.write(&format!("{v}\n"))?,
                Ok(_) => {}
                Err(e @ (EvalError::Io(_) | EvalError::FuelExhausted { .. } | EvalError::TooDeep { .. })) => return Err(e),
                Err(e) => self.interp.write(&format!("error: {}\n", describe(&src, &e)))?,
            }
        }
        Ok(())
    }

    /// The named operation's signature and desugared body.
    pub fn definition(&self, name: &str) -> Option<&(Signature, Expr)> {
        self.defs.iter().rev().find(|(s, _)| s.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Lines, Store};

    fn session(input: &str) -> Session {
        Session::new(Interp::new(Store::default()).with_input(Box::new(Lines::new(input))))
    }

    #[test]
    fn declarations_persist() {
        let mut s = session("");
        s.load("DEF sq [X:int]:int {X*X};").unwrap();
        assert_eq!(s.load("sq{7}").unwrap(), Some(Value::Int(49)));
        assert!(s.definition("sq").is_some());
    }

    #[test]
    fn type_errors_stop_evaluation() {
        let mut s = session("");
        let e = s.load("stdout << 1;\n1 + \"a\"").unwrap_err();
        assert!(matches!(e, EvalError::Type(_)));
        assert!(s.interp.store.log.is_empty());
        assert!(describe("1 + \"a\"", &e).contains("1:"), "{}", describe("1 + \"a\"", &e));
    }

    #[test]
    fn check_reports_solved_params() {
        let mut s = session("");
        let apps = s
            .check("DEF twice OF W [F[x:int]:int] [Return[f[X:int]:int] :W]:W { Return{F{F{X}}} } { twice{x*x}{stdout << f{2}} };")
            .unwrap();
        assert!(apps.iter().any(|a| a.head == "twice" && a.params == vec![("W".into(), crate::types::Type::ground("Output"))]), "{apps:?}");
        assert!(s.definition("twice").is_none());
    }

    #[test]
    fn repl_continues_after_errors() {
        let mut s = session("DEF sq [X:int]:int {X*X};\nsq{\"a\"}\nsq{\n3}\n");
        s.repl().unwrap();
        assert_eq!(s.interp.store.transcript.matches("> error:").count(), 1, "{}", s.interp.store.transcript);
        assert!(s.interp.store.transcript.contains("9\n"));
    }

    #[test]
    fn positions_are_line_and_column() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
