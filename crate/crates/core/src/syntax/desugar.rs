//! Convenience rules: identity blocks, declarations, level-name coercion and
//! list literals. Output is arity-saturated core.

use std::rc::Rc;

use super::ast::*;
use super::DesugarError;

#[derive(Debug, Clone)]
pub enum Entry {
    Op(Rc<Signature>),
    OpSym(Rc<OperatorSig>),
    /// A level name bound by an argument label; members are the parameters
    /// of `sig`.
    Level(Rc<Signature>),
}

/// Scoped signature environment. Later entries shadow earlier ones.
#[derive(Debug, Clone, Default)]
pub struct SigEnv {
    entries: Vec<(String, Entry)>,
}

impl SigEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mark(&self) -> usize {
        self.entries.len()
    }

    pub fn restore(&mut self, mark: usize) {
        self.entries.truncate(mark);
    }

    pub fn bind_op(&mut self, sig: Signature) {
        self.entries.push((sig.name.clone(), Entry::Op(Rc::new(sig))));
    }

    pub fn bind_opsym(&mut self, sig: OperatorSig) {
        self.entries.push((sig.symbol.clone(), Entry::OpSym(Rc::new(sig))));
    }

    pub fn bind_level(&mut self, label: &str, sig: Rc<Signature>) {
        self.entries.push((label.to_string(), Entry::Level(sig)));
    }

    /// Bind the parameters of `sig` as names, the scope an argument for
    /// parameter `sig` (or a definition body of `sig`) sees.
    pub fn bind_params(&mut self, sig: &Signature) {
        for p in &sig.params {
            match p {
                ParamSpec::ByName(s) | ParamSpec::ByValue(s) => self.entries.push((s.name.clone(), Entry::Op(Rc::new(s.clone())))),
                ParamSpec::Operator(o) => self.entries.push((o.symbol.clone(), Entry::OpSym(Rc::new(o.clone())))),
            }
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn lookup_op(&self, name: &str) -> Option<&Rc<Signature>> {
        self.entries.iter().rev().find_map(|(n, e)| match e {
            Entry::Op(s) if n == name => Some(s),
            _ => None,
        })
    }

    pub fn lookup_level(&self, name: &str) -> Option<&Rc<Signature>> {
        match self.lookup(name) {
            Some(Entry::Level(s)) => Some(s),
            _ => None,
        }
    }

    pub fn lookup_opsym(&self, sym: &str) -> Option<&Rc<OperatorSig>> {
        self.entries.iter().rev().find_map(|(n, e)| match e {
            Entry::OpSym(o) if n == sym => Some(o),
            _ => None,
        })
    }
}

pub const DEFAULT_MEMBER: &str = "__";
pub const VALUE_MEMBER: &str = "_";

pub struct Desugarer<'a> {
    env: &'a mut SigEnv,
}

pub fn desugar(e: &Expr, env: &mut SigEnv) -> Result<Expr, DesugarError> {
    Desugarer { env }.expr(e, false)
}

/// Desugar a member list (a brace body or program file).
pub fn desugar_members(ms: &[Expr], env: &mut SigEnv) -> Result<Vec<Expr>, DesugarError> {
    Desugarer { env }.members(ms)
}

fn span_of(e: &Expr) -> usize {
    match e {
        Expr::Apply(a) => a.span.0,
        Expr::Infix { span, .. } | Expr::Def { span, .. } => span.0,
        _ => 0,
    }
}

impl Desugarer<'_> {
    fn is_declaration(&self, e: &Expr) -> bool {
        match e {
            Expr::Def { app: None, .. } => true,
            Expr::Apply(a) if a.decl_label.is_some() => true,
            Expr::Apply(a) if a.qualifier.is_none() => {
                matches!(self.env.lookup(&a.op), Some(Entry::Op(sig)) if a.args.len() + 1 == sig.arity())
            }
            _ => false,
        }
    }

    fn members(&mut self, ms: &[Expr]) -> Result<Vec<Expr>, DesugarError> {
        let mut out = Vec::with_capacity(ms.len());
        for (i, m) in ms.iter().enumerate() {
            let last = i + 1 == ms.len();
            if self.is_declaration(m) {
                if last {
                    if let Expr::Def { .. } = m {
                        return Err(DesugarError::AmbiguousDeclaration { pos: span_of(m) });
                    }
                    if let Expr::Apply(a) = m {
                        if a.decl_label.is_some() {
                            return Err(DesugarError::AmbiguousDeclaration { pos: a.span.0 });
                        }
                    }
                } else {
                    let rest = Expr::seq(ms[i + 1..].to_vec());
                    let completed = match m.clone() {
                        Expr::Def { sig, body, span, .. } => Expr::Def { sig, body, app: Some(Box::new(rest)), span },
                        Expr::Apply(mut a) => {
                            let label = a.decl_label.take();
                            a.args.push(Arg { label, body: rest, passing: Passing::Braces });
                            Expr::Apply(a)
                        }
                        _ => unreachable!(),
                    };
                    out.push(self.expr(&completed, false)?);
                    return Ok(out);
                }
            }
            out.push(self.expr(m, false)?);
        }
        Ok(out)
    }

    fn body(&mut self, e: &Expr) -> Result<Expr, DesugarError> {
        match e {
            Expr::Seq(ms) => Ok(Expr::seq(self.members(ms)?)),
            other => self.expr(other, false),
        }
    }

    /// `want_lvalue` selects `__` over `_` when a level name is coerced.
    fn expr(&mut self, e: &Expr, want_lvalue: bool) -> Result<Expr, DesugarError> {
        match e {
            Expr::Int(_) | Expr::Str(_) => Ok(e.clone()),
            Expr::Seq(ms) => Ok(Expr::seq(self.members(ms)?)),
            Expr::Block(ms) => {
                if self.env.lookup_op("program").is_none() {
                    return Err(DesugarError::UnknownOperation { pos: 0, name: "program".into() });
                }
                let body = Expr::seq(self.members(ms)?);
                Ok(Expr::Apply(Apply::new("program", vec![Arg::braced(body)])))
            }
            Expr::List(items) => {
                let mut acc = Expr::name("nil");
                for it in items.iter().rev() {
                    acc = Expr::infix("::", it.clone(), acc);
                }
                self.expr(&acc, want_lvalue)
            }
            Expr::Def { sig, body, app, span } => {
                let Some(app) = app else {
                    return Err(DesugarError::AmbiguousDeclaration { pos: span.0 });
                };
                let mark = self.env.mark();
                self.env.bind_op(sig.clone());
                self.env.bind_params(sig);
                let body = self.body(body);
                self.env.restore(mark);
                let body = body?;
                self.env.bind_op(sig.clone());
                let app = self.body(app);
                self.env.restore(mark);
                Ok(Expr::Def { sig: sig.clone(), body: Box::new(body), app: Some(Box::new(app?)), span: *span })
            }
            Expr::Apply(a) => self.apply(a, want_lvalue),
            Expr::Infix { op, owner, lhs, rhs, span } => {
                let owner = match owner {
                    Some(o) => Some(o.clone()),
                    None => self.operator_owner(op, lhs),
                };
                let (lw, rw) = match &owner {
                    Some(level) => self.lvalue_sides(level, op),
                    None => (false, false),
                };
                Ok(Expr::Infix {
                    op: op.clone(),
                    owner,
                    lhs: Box::new(self.expr(lhs, lw)?),
                    rhs: Box::new(self.expr(rhs, rw)?),
                    span: *span,
                })
            }
        }
    }

    /// The level whose member operator `op` applies when `lhs` names that level.
    fn operator_owner(&self, op: &str, lhs: &Expr) -> Option<String> {
        let Expr::Apply(a) = lhs else { return None };
        if !a.args.is_empty() {
            return None;
        }
        let level = a.qualifier.as_deref().unwrap_or(&a.op);
        let sig = self.env.lookup_level(level)?;
        sig.params
            .iter()
            .any(|p| matches!(p, ParamSpec::Operator(o) if o.symbol == op))
            .then(|| level.to_string())
    }

    fn lvalue_sides(&self, level: &str, op: &str) -> (bool, bool) {
        let Some(sig) = self.env.lookup_level(level) else { return (false, false) };
        let default_ty = sig.param(DEFAULT_MEMBER).and_then(|p| p.signature()).and_then(|s| s.result.clone());
        let Some(ParamSpec::Operator(o)) = sig.params.iter().find(|p| matches!(p, ParamSpec::Operator(o) if o.symbol == op)) else {
            return (false, false);
        };
        match default_ty {
            Some(t) => (o.lhs == t, o.rhs == t),
            None => (false, false),
        }
    }

    fn apply(&mut self, a: &Apply, want_lvalue: bool) -> Result<Expr, DesugarError> {
        if a.decl_label.is_some() {
            return Err(DesugarError::AmbiguousDeclaration { pos: a.span.0 });
        }
        let sig: Rc<Signature> = match &a.qualifier {
            Some(q) => {
                let level = self
                    .env
                    .lookup_level(q)
                    .ok_or_else(|| DesugarError::NotALevel { pos: a.span.0, name: q.clone() })?;
                match level.param(&a.op).and_then(|p| p.signature()) {
                    Some(s) => Rc::new(s.clone()),
                    None => return Err(DesugarError::UnknownMember { pos: a.span.0, level: q.clone(), member: a.op.clone() }),
                }
            }
            None => match self.env.lookup(&a.op) {
                Some(Entry::Level(level)) if a.args.is_empty() => {
                    let has = |m: &str| level.param(m).is_some();
                    let member = if has(VALUE_MEMBER) && !want_lvalue {
                        VALUE_MEMBER
                    } else if has(DEFAULT_MEMBER) {
                        DEFAULT_MEMBER
                    } else {
                        return Err(DesugarError::UnknownMember { pos: a.span.0, level: a.op.clone(), member: DEFAULT_MEMBER.into() });
                    };
                    return Ok(Expr::Apply(Apply {
                        op: member.to_string(),
                        qualifier: Some(a.op.clone()),
                        args: Vec::new(),
                        decl_label: None,
                        span: a.span,
                    }));
                }
                Some(Entry::Op(sig)) => sig.clone(),
                Some(Entry::Level(_)) | Some(Entry::OpSym(_)) | None => {
                    return Err(DesugarError::UnknownOperation { pos: a.span.0, name: a.op.clone() })
                }
            },
        };
        if a.args.len() != sig.arity() {
            return Err(DesugarError::ArityMismatch {
                pos: a.span.0,
                name: a.op.clone(),
                expected: sig.arity(),
                found: a.args.len(),
            });
        }
        let mut args = Vec::with_capacity(a.args.len());
        for (k, arg) in a.args.iter().enumerate() {
            let param = &sig.params[k];
            if let Some(label) = &arg.label {
                if label != param.name() && sig.param(label).is_some() {
                    return Err(DesugarError::LabelMismatch {
                        pos: a.span.0,
                        label: label.clone(),
                        expected: param.name().to_string(),
                    });
                }
            }
            let mark = self.env.mark();
            if let Some(psig) = param.signature() {
                self.env.bind_params(psig);
                if let Some(label) = &arg.label {
                    self.env.bind_level(label, Rc::new(psig.clone()));
                }
            }
            let body = self.body(&arg.body);
            self.env.restore(mark);
            args.push(Arg { label: arg.label.clone(), body: body?, passing: arg.passing });
        }
        Ok(Expr::Apply(Apply { op: a.op.clone(), qualifier: a.qualifier.clone(), args, decl_label: None, span: a.span }))
    }
}

/// Arity saturation and label check over a core tree.
pub fn check_saturated(e: &Expr, env: &mut SigEnv) -> Result<(), DesugarError> {
    let out = desugar(e, env)?;
    if &out == e {
        Ok(())
    } else {
        Err(DesugarError::NotCore)
    }
}
