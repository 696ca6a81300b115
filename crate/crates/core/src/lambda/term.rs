//! Lambda terms, capture-avoiding substitution and normal-order reduction.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::LambdaError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Abs(String, Box<Term>),
    App(Box<Term>, Box<Term>),
    Int(i64),
    Prim(String, Box<Term>, Box<Term>),
}

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

pub fn abs(x: &str, body: Term) -> Term {
    Term::Abs(x.to_string(), Box::new(body))
}

pub fn app(f: Term, a: Term) -> Term {
    Term::App(Box::new(f), Box::new(a))
}

pub fn prim(op: &str, l: Term, r: Term) -> Term {
    Term::Prim(op.to_string(), Box::new(l), Box::new(r))
}

pub const PRIM_OPS: [&str; 4] = ["+", "-", "*", "/"];

/// Source of fresh binder names. Names have the form `base'n`.
#[derive(Debug, Clone)]
pub struct NameSupply {
    counter: u64,
}

impl NameSupply {
    pub fn new(seed: u64) -> Self {
        NameSupply { counter: seed }
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let base = base.split('\'').next().unwrap_or(base);
        let base = if base.is_empty() { "v" } else { base };
        self.counter += 1;
        format!("{base}'{}", self.counter)
    }
}

impl Default for NameSupply {
    fn default() -> Self {
        NameSupply::new(0)
    }
}

impl Term {
    pub fn free_vars(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut HashSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Abs(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::App(f, a) | Term::Prim(_, f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Term::Int(_) => {}
        }
    }

    pub fn is_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::Abs(y, b) => y != x && b.is_free(x),
            Term::App(f, a) | Term::Prim(_, f, a) => f.is_free(x) || a.is_free(x),
            Term::Int(_) => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Int(_) => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, a) | Term::Prim(_, f, a) => 1 + f.size() + a.size(),
        }
    }

    /// Every binder name, in pre-order.
    pub fn binders(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn go(t: &Term, out: &mut Vec<String>) {
            match t {
                Term::Abs(x, b) => {
                    out.push(x.clone());
                    go(b, out);
                }
                Term::App(f, a) | Term::Prim(_, f, a) => {
                    go(f, out);
                    go(a, out);
                }
                Term::Var(_) | Term::Int(_) => {}
            }
        }
        go(self, &mut out);
        out
    }
}

/// `[s/x] t`, renaming binders of `t` that would capture free names of `s`.
pub fn substitute(t: &Term, x: &str, s: &Term, names: &mut NameSupply) -> Term {
    let fs = s.free_vars();
    subst(t, x, s, &fs, names)
}

fn subst(t: &Term, x: &str, s: &Term, fs: &HashSet<String>, names: &mut NameSupply) -> Term {
    match t {
        Term::Var(y) if y == x => s.clone(),
        Term::Var(_) | Term::Int(_) => t.clone(),
        Term::Abs(y, b) => {
            if y == x || !b.is_free(x) {
                return t.clone();
            }
            if fs.contains(y) {
                let fresh = names.fresh(y);
                let renamed = subst(b, y, &Term::Var(fresh.clone()), &HashSet::from([fresh.clone()]), names);
                Term::Abs(fresh, Box::new(subst(&renamed, x, s, fs, names)))
            } else {
                Term::Abs(y.clone(), Box::new(subst(b, x, s, fs, names)))
            }
        }
        Term::App(f, a) => app(subst(f, x, s, fs, names), subst(a, x, s, fs, names)),
        Term::Prim(op, l, r) => prim(op, subst(l, x, s, fs, names), subst(r, x, s, fs, names)),
    }
}

pub fn eval_prim(op: &str, l: i64, r: i64) -> Result<i64, LambdaError> {
    let v = match op {
        "+" => l.checked_add(r),
        "-" => l.checked_sub(r),
        "*" => l.checked_mul(r),
        "/" => {
            if r == 0 {
                return Err(LambdaError::DivisionByZero);
            }
            l.checked_div(r)
        }
        _ => return Err(LambdaError::Unsupported { what: format!("operator `{op}`") }),
    };
    v.ok_or_else(|| LambdaError::Overflow { op: op.to_string(), lhs: l, rhs: r })
}

/// One leftmost-outermost step, or `None` at normal form.
pub fn step(t: &Term, names: &mut NameSupply) -> Result<Option<Term>, LambdaError> {
    Ok(match t {
        Term::App(f, a) => {
            if let Term::Abs(x, b) = f.as_ref() {
                Some(substitute(b, x, a, names))
            } else if let Some(f2) = step(f, names)? {
                Some(app(f2, (**a).clone()))
            } else {
                step(a, names)?.map(|a2| app((**f).clone(), a2))
            }
        }
        Term::Abs(x, b) => step(b, names)?.map(|b2| abs(x, b2)),
        Term::Prim(op, l, r) => match (l.as_ref(), r.as_ref()) {
            (Term::Int(a), Term::Int(b)) => Some(Term::Int(eval_prim(op, *a, *b)?)),
            _ => {
                if let Some(l2) = step(l, names)? {
                    Some(prim(op, l2, (**r).clone()))
                } else {
                    step(r, names)?.map(|r2| prim(op, (**l).clone(), r2))
                }
            }
        },
        Term::Var(_) | Term::Int(_) => None,
    })
}

pub const DEFAULT_FUEL: u64 = 100_000;

pub fn normalize(t: &Term, fuel: u64, names: &mut NameSupply) -> Result<Term, LambdaError> {
    normalize_trace(t, fuel, names).map(|(t, _)| t)
}

/// Normal form plus the number of steps taken.
pub fn normalize_trace(t: &Term, fuel: u64, names: &mut NameSupply) -> Result<(Term, u64), LambdaError> {
    let mut cur = t.clone();
    let mut steps = 0;
    while let Some(next) = step(&cur, names)? {
        steps += 1;
        if steps > fuel {
            return Err(LambdaError::FuelExhausted { fuel });
        }
        cur = next;
    }
    Ok((cur, steps))
}

pub fn alpha_eq(t1: &Term, t2: &Term) -> bool {
    fn go<'a>(a: &'a Term, b: &'a Term, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let bx = env.iter().rev().find(|(l, _)| *l == x);
                let by = env.iter().rev().find(|(_, r)| *r == y);
                match (bx, by) {
                    (Some(p), Some(q)) => std::ptr::eq(p, q),
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Abs(x, p), Term::Abs(y, q)) => {
                env.push((x, y));
                let ok = go(p, q, env);
                env.pop();
                ok
            }
            (Term::App(f, x), Term::App(g, y)) => go(f, g, env) && go(x, y, env),
            (Term::Prim(o1, l1, r1), Term::Prim(o2, l2, r2)) => o1 == o2 && go(l1, l2, env) && go(r1, r2, env),
            (Term::Int(x), Term::Int(y)) => x == y,
            _ => false,
        }
    }
    go(t1, t2, &mut Vec::new())
}

/// Prefix dump: `(lam x (app f x))`.
pub fn dump(t: &Term) -> String {
    match t {
        Term::Var(x) => x.clone(),
        Term::Int(v) => v.to_string(),
        Term::Abs(x, b) => format!("(lam {x} {})", dump(b)),
        Term::App(f, a) => format!("(app {} {})", dump(f), dump(a)),
        Term::Prim(op, l, r) => format!("(prim {op} {} {})", dump(l), dump(r)),
    }
}

/// Rename every binder to `base'n` in pre-order, a canonical form for goldens.
pub fn canonical(t: &Term) -> Term {
    fn go(t: &Term, env: &mut HashMap<String, Vec<String>>, n: &mut u64) -> Term {
        match t {
            Term::Var(x) => Term::Var(env.get(x).and_then(|v| v.last().cloned()).unwrap_or_else(|| x.clone())),
            Term::Int(v) => Term::Int(*v),
            Term::Abs(x, b) => {
                *n += 1;
                let base = x.split('\'').next().unwrap_or(x);
                let new = format!("{base}{n}");
                env.entry(x.clone()).or_default().push(new.clone());
                let body = go(b, env, n);
                env.get_mut(x).unwrap().pop();
                Term::Abs(new, Box::new(body))
            }
            Term::App(f, a) => {
                let f = go(f, env, n);
                app(f, go(a, env, n))
            }
            Term::Prim(op, l, r) => {
                let l = go(l, env, n);
                prim(op, l, go(r, env, n))
            }
        }
    }
    go(t, &mut HashMap::new(), &mut 0)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Int(v) => write!(f, "{v}"),
            Term::Abs(x, b) => write!(f, "λ{x}.{b}"),
            Term::App(g, a) => match g.as_ref() {
                Term::Abs(..) => write!(f, "({g})({a})"),
                _ => write!(f, "{g}({a})"),
            },
            Term::Prim(op, l, r) => write!(f, "({l}{op}{r})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_renames_capturing_binder() {
        let mut ns = NameSupply::default();
        let t = abs("y", var("x"));
        let got = substitute(&t, "x", &var("y"), &mut ns);
        let Term::Abs(b, body) = &got else { panic!() };
        assert_ne!(b, "y");
        assert_eq!(**body, var("y"));
        assert!(alpha_eq(&got, &abs("z", var("y"))));
    }

    #[test]
    fn substitution_duplicates_argument() {
        let mut ns = NameSupply::default();
        let sq = prim("*", var("x"), var("x"));
        let arg = prim("*", Term::Int(3), Term::Int(2));
        assert_eq!(substitute(&sq, "x", &arg, &mut ns), prim("*", arg.clone(), arg));
    }

    #[test]
    fn substitution_noop_when_not_free() {
        let mut ns = NameSupply::default();
        let t = abs("x", var("x"));
        assert_eq!(substitute(&t, "x", &Term::Int(1), &mut ns), t);
    }

    #[test]
    fn identity_applied() {
        let mut ns = NameSupply::default();
        let t = app(abs("x", var("x")), Term::Int(5));
        assert_eq!(normalize(&t, 10, &mut ns).unwrap(), Term::Int(5));
    }

    #[test]
    fn omega_runs_out_of_fuel() {
        let mut ns = NameSupply::default();
        let w = abs("x", app(var("x"), var("x")));
        let t = app(w.clone(), w);
        assert!(matches!(normalize(&t, 50, &mut ns), Err(LambdaError::FuelExhausted { fuel: 50 })));
    }

    #[test]
    fn overflow_is_an_error() {
        let mut ns = NameSupply::default();
        let t = prim("*", Term::Int(i64::MAX), Term::Int(2));
        assert!(matches!(normalize(&t, 10, &mut ns), Err(LambdaError::Overflow { .. })));
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq(&abs("x", var("x")), &abs("y", var("y"))));
        assert!(!alpha_eq(&abs("x", abs("y", var("x"))), &abs("y", abs("x", var("x")))));
        assert!(!alpha_eq(&abs("x", var("z")), &abs("y", var("y"))));
    }

    #[test]
    fn dump_format() {
        assert_eq!(dump(&abs("x", app(var("f"), var("x")))), "(lam x (app f x))");
    }
}
