//! Mathematical expressions: the meanings programs transform into.

use std::fmt;

use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};
use thiserror::Error;

/// Numbers a closed expression can be evaluated in.
pub trait Scalar:
    Clone + PartialOrd + Zero + One + CheckedAdd + CheckedSub + CheckedMul + CheckedDiv + From<i64> + fmt::Display
{
}

impl<T> Scalar for T where
    T: Clone + PartialOrd + Zero + One + CheckedAdd + CheckedSub + CheckedMul + CheckedDiv + From<i64> + fmt::Display
{
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MathExpr {
    Num(i64),
    /// A program-level name.
    Sym(String),
    /// A chain variable: θ, τ, η, μ.
    Hole(String),
    BinOp(String, Box<MathExpr>, Box<MathExpr>),
    Cond(Box<MathExpr>, Box<MathExpr>, Box<MathExpr>),
    /// Σ_{index=lo}^{hi} body
    Sum { index: String, lo: Box<MathExpr>, hi: Box<MathExpr>, body: Box<MathExpr> },
    /// Uninterpreted function or predicate.
    Call(String, Vec<MathExpr>),
}

pub const THETA: &str = "θ";

/// Infix symbols with a fixed mathematical meaning.
pub const OPERATORS: [&str; 10] = ["*", "+", "-", "/", "=", "<", ">", "<=", ">=", "<>"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MathError {
    #[error("free variable `{0}`")]
    Free(String),
    #[error("arithmetic overflow in `{0}`")]
    Overflow(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operator `{0}` has no numeric meaning")]
    Uninterpreted(String),
}

pub fn theta() -> MathExpr {
    MathExpr::Hole(THETA.to_string())
}

pub fn bin(op: &str, l: MathExpr, r: MathExpr) -> MathExpr {
    MathExpr::BinOp(op.to_string(), Box::new(l), Box::new(r))
}

fn apply_op<N: Scalar>(op: &str, a: N, b: N) -> Result<N, MathError> {
    let truth = |t: bool| if t { N::one() } else { N::zero() };
    let overflow = || MathError::Overflow(op.to_string());
    match op {
        "+" => a.checked_add(&b).ok_or_else(overflow),
        "-" => a.checked_sub(&b).ok_or_else(overflow),
        "*" => a.checked_mul(&b).ok_or_else(overflow),
        "/" => {
            if b.is_zero() {
                Err(MathError::DivisionByZero)
            } else {
                a.checked_div(&b).ok_or_else(overflow)
            }
        }
        "=" => Ok(truth(a == b)),
        "<>" => Ok(truth(a != b)),
        "<" => Ok(truth(a < b)),
        ">" => Ok(truth(a > b)),
        "<=" => Ok(truth(a <= b)),
        ">=" => Ok(truth(a >= b)),
        _ => Err(MathError::Uninterpreted(op.to_string())),
    }
}

impl MathExpr {
    pub fn is_var(&self) -> bool {
        matches!(self, MathExpr::Sym(_) | MathExpr::Hole(_))
    }

    /// Replace `target` (a `Sym` or `Hole`) by `with`.
    pub fn subst(&self, target: &MathExpr, with: &MathExpr) -> MathExpr {
        match self {
            MathExpr::Sym(_) | MathExpr::Hole(_) if self == target => with.clone(),
            MathExpr::Num(_) | MathExpr::Sym(_) | MathExpr::Hole(_) => self.clone(),
            MathExpr::BinOp(op, l, r) => bin(op, l.subst(target, with), r.subst(target, with)),
            MathExpr::Cond(c, t, e) => MathExpr::Cond(
                Box::new(c.subst(target, with)),
                Box::new(t.subst(target, with)),
                Box::new(e.subst(target, with)),
            ),
            MathExpr::Sum { index, lo, hi, body } => {
                let bound = matches!(target, MathExpr::Sym(s) if s == index);
                MathExpr::Sum {
                    index: index.clone(),
                    lo: Box::new(lo.subst(target, with)),
                    hi: Box::new(hi.subst(target, with)),
                    body: Box::new(if bound { (**body).clone() } else { body.subst(target, with) }),
                }
            }
            MathExpr::Call(f, args) => MathExpr::Call(f.clone(), args.iter().map(|a| a.subst(target, with)).collect()),
        }
    }

    pub fn occurs(&self, target: &MathExpr) -> bool {
        match self {
            MathExpr::Sym(_) | MathExpr::Hole(_) => self == target,
            MathExpr::Num(_) => false,
            MathExpr::BinOp(_, l, r) => l.occurs(target) || r.occurs(target),
            MathExpr::Cond(c, t, e) => c.occurs(target) || t.occurs(target) || e.occurs(target),
            MathExpr::Sum { index, lo, hi, body } => {
                lo.occurs(target)
                    || hi.occurs(target)
                    || (!matches!(target, MathExpr::Sym(s) if s == index) && body.occurs(target))
            }
            MathExpr::Call(_, args) => args.iter().any(|a| a.occurs(target)),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_names().is_empty()
    }

    pub fn free_names(&self) -> Vec<MathExpr> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<MathExpr>) {
        match self {
            MathExpr::Sym(s) if bound.contains(s) => {}
            MathExpr::Sym(_) | MathExpr::Hole(_) => {
                if !out.contains(self) {
                    out.push(self.clone());
                }
            }
            MathExpr::Num(_) => {}
            MathExpr::BinOp(_, l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            MathExpr::Cond(c, t, e) => {
                c.collect_free(bound, out);
                t.collect_free(bound, out);
                e.collect_free(bound, out);
            }
            MathExpr::Sum { index, lo, hi, body } => {
                lo.collect_free(bound, out);
                hi.collect_free(bound, out);
                bound.push(index.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            MathExpr::Call(_, args) => args.iter().for_each(|a| a.collect_free(bound, out)),
        }
    }

    /// Numeric value of a closed expression.
    pub fn evaluate<N: Scalar>(&self) -> Result<N, MathError> {
        self.eval_in(&mut Vec::new())
    }

    fn eval_in<N: Scalar>(&self, env: &mut Vec<(String, N)>) -> Result<N, MathError> {
        match self {
            MathExpr::Num(v) => Ok(N::from(*v)),
            MathExpr::Sym(s) => env
                .iter()
                .rev()
                .find(|(n, _)| n == s)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| MathError::Free(s.clone())),
            MathExpr::Hole(h) => Err(MathError::Free(h.clone())),
            MathExpr::BinOp(op, l, r) => {
                let a = l.eval_in(env)?;
                let b = r.eval_in(env)?;
                apply_op(op, a, b)
            }
            MathExpr::Cond(c, t, e) => {
                if c.eval_in::<N>(env)?.is_zero() {
                    e.eval_in(env)
                } else {
                    t.eval_in(env)
                }
            }
            MathExpr::Sum { index, lo, hi, body } => {
                let mut i: N = lo.eval_in(env)?;
                let hi: N = hi.eval_in(env)?;
                let mut acc = N::zero();
                while i <= hi {
                    env.push((index.clone(), i.clone()));
                    let term = body.eval_in(env);
                    env.pop();
                    acc = acc.checked_add(&term?).ok_or_else(|| MathError::Overflow("Σ".into()))?;
                    i = i.checked_add(&N::one()).ok_or_else(|| MathError::Overflow("Σ".into()))?;
                }
                Ok(acc)
            }
            MathExpr::Call(f, _) => Err(MathError::Uninterpreted(f.clone())),
        }
    }

    /// Fold operator nodes whose operands are both numerals.
    pub fn fold(&self) -> MathExpr {
        match self {
            MathExpr::BinOp(op, l, r) => {
                let (l, r) = (l.fold(), r.fold());
                if let (MathExpr::Num(a), MathExpr::Num(b)) = (&l, &r) {
                    if let Ok(v) = apply_op::<i64>(op, *a, *b) {
                        return MathExpr::Num(v);
                    }
                }
                bin(op, l, r)
            }
            MathExpr::Cond(c, t, e) => match c.fold() {
                MathExpr::Num(0) => e.fold(),
                MathExpr::Num(_) => t.fold(),
                c => MathExpr::Cond(Box::new(c), Box::new(t.fold()), Box::new(e.fold())),
            },
            MathExpr::Sum { index, lo, hi, body } => MathExpr::Sum {
                index: index.clone(),
                lo: Box::new(lo.fold()),
                hi: Box::new(hi.fold()),
                body: Box::new(body.fold()),
            },
            MathExpr::Call(f, args) => MathExpr::Call(f.clone(), args.iter().map(MathExpr::fold).collect()),
            other => other.clone(),
        }
    }

    pub fn to_latex(&self) -> String {
        match self {
            MathExpr::Num(v) => v.to_string(),
            MathExpr::Sym(s) => latex_name(s),
            MathExpr::Hole(h) => latex_name(h),
            MathExpr::BinOp(op, l, r) => {
                let sym = match op.as_str() {
                    "*" => "\\cdot ",
                    "<=" => "\\leq ",
                    ">=" => "\\geq ",
                    "<>" => "\\neq ",
                    other => other,
                };
                format!("({}{sym}{})", l.to_latex(), r.to_latex())
            }
            MathExpr::Cond(c, t, e) => {
                format!("\\mathrm{{if}}({},{},{})", c.to_latex(), t.to_latex(), e.to_latex())
            }
            MathExpr::Sum { index, lo, hi, body } => {
                format!("\\Sigma_{{{index}={}}}^{{{}}}{}", lo.to_latex(), hi.to_latex(), body.to_latex())
            }
            MathExpr::Call(f, args) => {
                let args: Vec<_> = args.iter().map(MathExpr::to_latex).collect();
                format!("{}({})", latex_name(f), args.join(","))
            }
        }
    }
}

/// `τ3` → `\tau_3`, `θ` → `\theta`, `__` → `\_\_`.
pub fn latex_name(name: &str) -> String {
    let mut chars = name.chars();
    let greek = match chars.next() {
        Some('θ') => Some("\\theta"),
        Some('τ') => Some("\\tau"),
        Some('η') => Some("\\eta"),
        Some('μ') => Some("\\mu"),
        _ => None,
    };
    match greek {
        Some(g) => {
            let rest: String = chars.collect();
            if rest.is_empty() {
                g.to_string()
            } else if rest.chars().count() == 1 {
                format!("{g}_{rest}")
            } else {
                format!("{g}_{{{rest}}}")
            }
        }
        None => name.replace('_', "\\_"),
    }
}

impl fmt::Display for MathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MathExpr::Num(v) => write!(f, "{v}"),
            MathExpr::Sym(s) | MathExpr::Hole(s) => f.write_str(s),
            MathExpr::BinOp(op, l, r) => write!(f, "({l}{op}{r})"),
            MathExpr::Cond(c, t, e) => write!(f, "if({c},{t},{e})"),
            MathExpr::Sum { index, lo, hi, body } => write!(f, "Σ_{{{index}={lo}}}^{{{hi}}}{body}"),
            MathExpr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> MathExpr {
        MathExpr::Sym(s.into())
    }

    #[test]
    fn squares_of_squares() {
        let c = sym("c");
        let e = bin("*", bin("*", c.clone(), c.clone()), bin("*", c.clone(), c));
        assert_eq!(e.to_string(), "((c*c)*(c*c))");
        let two = e.subst(&sym("c"), &MathExpr::Num(2));
        assert_eq!(two.evaluate::<i64>(), Ok(16));
        assert_eq!(two.to_latex(), "((2\\cdot 2)\\cdot (2\\cdot 2))");
    }

    #[test]
    fn odd_sum() {
        let body = bin("-", bin("*", MathExpr::Num(2), sym("i")), MathExpr::Num(1));
        let s = MathExpr::Sum { index: "i".into(), lo: Box::new(MathExpr::Num(1)), hi: Box::new(sym("n")), body: Box::new(body) };
        let s5 = s.subst(&sym("n"), &MathExpr::Num(5));
        assert_eq!(s5.evaluate::<i64>(), Ok(25));
        assert!(!s.subst(&sym("i"), &MathExpr::Num(0)).occurs(&MathExpr::Num(0)));
    }

    #[test]
    fn errors() {
        assert_eq!(sym("x").evaluate::<i64>(), Err(MathError::Free("x".into())));
        assert_eq!(bin("/", MathExpr::Num(1), MathExpr::Num(0)).evaluate::<i64>(), Err(MathError::DivisionByZero));
        assert!(matches!(bin("*", MathExpr::Num(i64::MAX), MathExpr::Num(2)).evaluate::<i64>(), Err(MathError::Overflow(_))));
    }

    #[test]
    fn fold_and_cond() {
        let e = MathExpr::Cond(Box::new(bin("=", MathExpr::Num(0), MathExpr::Num(0))), Box::new(MathExpr::Num(1)), Box::new(sym("y")));
        assert_eq!(e.fold(), MathExpr::Num(1));
        assert_eq!(latex_name("τ12"), "\\tau_{12}");
    }
}
