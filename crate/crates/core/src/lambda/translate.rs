//! Translation of core expressions to lambda terms.

use std::rc::Rc;

use super::term::*;
use super::LambdaError;
use crate::syntax::{Expr, ParamSpec, Passing, SigEnv, Signature};

struct Scope<'a> {
    /// (source name, binder name, signature)
    names: Vec<(String, String, Rc<Signature>)>,
    sigs: &'a SigEnv,
    supply: &'a mut NameSupply,
}

/// The `DEF` combinator `λB.λA.A(B)`.
pub fn def_combinator(names: &mut NameSupply) -> Term {
    let b = names.fresh("B");
    let a = names.fresh("A");
    abs(&b, abs(&a, app(var(&a), var(&b))))
}

/// Translate a desugared, by-name-only expression. Operations that are not
/// bound locally stay free, except `program`, which is the identity.
pub fn translate(e: &Expr, sigs: &SigEnv, supply: &mut NameSupply) -> Result<Term, LambdaError> {
    Scope { names: Vec::new(), sigs, supply }.expr(e)
}

impl Scope<'_> {
    fn lookup(&self, name: &str) -> Option<(&str, &Rc<Signature>)> {
        self.names.iter().rev().find(|(n, _, _)| n == name).map(|(_, b, s)| (b.as_str(), s))
    }

    /// Bind the parameters of `sig`, returning their binder names in order.
    fn bind_params(&mut self, sig: &Signature) -> Result<Vec<String>, LambdaError> {
        let mut out = Vec::new();
        for p in &sig.params {
            match p {
                ParamSpec::ByName(s) => {
                    let b = self.supply.fresh(&s.name);
                    self.names.push((s.name.clone(), b.clone(), Rc::new(s.clone())));
                    out.push(b);
                }
                ParamSpec::ByValue(s) => {
                    return Err(LambdaError::Unsupported { what: format!("by-value parameter `{}`", s.name) })
                }
                ParamSpec::Operator(o) => {
                    return Err(LambdaError::Unsupported { what: format!("operator parameter `{}`", o.symbol) })
                }
            }
        }
        Ok(out)
    }

    fn lambdas(&mut self, sig: &Signature, body: &Expr) -> Result<Term, LambdaError> {
        let mark = self.names.len();
        let binders = self.bind_params(sig);
        let result = binders.and_then(|bs| {
            let t = self.expr(body)?;
            Ok(bs.iter().rev().fold(t, |t, b| abs(b, t)))
        });
        self.names.truncate(mark);
        result
    }

    fn expr(&mut self, e: &Expr) -> Result<Term, LambdaError> {
        match e {
            Expr::Int(v) => Ok(Term::Int(*v)),
            Expr::Str(_) => Err(LambdaError::Unsupported { what: "string constant".into() }),
            Expr::Seq(_) => Err(LambdaError::Unsupported { what: "sequence".into() }),
            Expr::Block(_) | Expr::List(_) => Err(LambdaError::Unsupported { what: "raw syntax".into() }),
            Expr::Infix { op, owner, lhs, rhs, .. } => {
                if owner.is_some() || !PRIM_OPS.contains(&op.as_str()) {
                    return Err(LambdaError::Unsupported { what: format!("operator `{op}`") });
                }
                let l = self.expr(lhs)?;
                Ok(prim(op, l, self.expr(rhs)?))
            }
            Expr::Def { sig, body, app: Some(a), .. } => {
                let d = self.lambdas(sig, body)?;
                let f = self.supply.fresh(&sig.name);
                let mark = self.names.len();
                self.names.push((sig.name.clone(), f.clone(), Rc::new(sig.clone())));
                let a = self.expr(a);
                self.names.truncate(mark);
                let comb = def_combinator(self.supply);
                Ok(app(app(comb, d), abs(&f, a?)))
            }
            Expr::Def { .. } => Err(LambdaError::Unsupported { what: "declaration".into() }),
            Expr::Apply(a) => {
                let (head, sig) = match self.lookup(&a.op) {
                    Some((b, s)) => (var(b), s.clone()),
                    None => {
                        let Some(s) = self.sigs.lookup_op(&a.op) else {
                            return Err(LambdaError::UnboundName { name: a.op.clone() });
                        };
                        let head = if a.op == "program" && a.qualifier.is_none() {
                            let b = self.supply.fresh("b");
                            abs(&b, var(&b))
                        } else {
                            var(&a.op)
                        };
                        (head, s.clone())
                    }
                };
                let mut t = head;
                for (k, arg) in a.args.iter().enumerate() {
                    if arg.passing == Passing::Values {
                        return Err(LambdaError::Unsupported { what: "value argument".into() });
                    }
                    let psig = match sig.params.get(k) {
                        Some(ParamSpec::ByName(s)) => s.clone(),
                        _ => return Err(LambdaError::Unsupported { what: format!("argument {} of `{}`", k + 1, a.op) }),
                    };
                    let arg_term = self.lambdas(&psig, &arg.body)?;
                    t = app(t, arg_term);
                }
                Ok(t)
            }
        }
    }
}
