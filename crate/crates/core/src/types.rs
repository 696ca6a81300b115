//! First-order type inference. Types are sets of values; type parameters
//! are solved per application by unification, and types declared with `OF`
//! on a parameter are fresh for every application.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::syntax::{parse_operator_signature, Apply, Expr, OperatorSig, ParamSpec, Signature, TypeExpr, TypeParam};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Ground(String),
    /// Postfix application: `Applied(string, Array)` is `string Array`.
    Applied(Box<Type>, String),
    /// Type parameter `name` of application number `id`.
    Param(u32, String),
    /// A member type, distinct from every other.
    Fresh(u32, String),
}

impl Type {
    pub fn ground(n: &str) -> Type {
        Type::Ground(n.to_string())
    }

    pub fn int() -> Type {
        Type::ground("int")
    }

    pub fn void() -> Type {
        Type::ground("void")
    }

    fn mentions(&self, id: u32, name: &str) -> bool {
        match self {
            Type::Param(k, n) => *k == id && n == name,
            Type::Applied(t, _) => t.mentions(id, name),
            _ => false,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Ground(n) => f.write_str(n),
            Type::Applied(t, op) => write!(f, "{t} {op}"),
            Type::Param(_, n) => write!(f, "'{n}"),
            Type::Fresh(k, n) => write!(f, "{n}#{k}"),
        }
    }
}

pub const BUILTIN_TYPES: [&str; 6] = ["int", "string", "bool", "void", "Input", "Output"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("at {pos}: expected {expected}, found {found}")]
    TypeMismatch { pos: usize, expected: String, found: String },
    #[error("at {pos}: type parameter {param} of {op} is not determined")]
    UnresolvedTypeParam { pos: usize, op: String, param: String },
    #[error("at {pos}: no signature for `{name}`")]
    UnknownOperator { pos: usize, name: String },
    #[error("at {pos}: `{name}` is ambiguous for these operand types")]
    AmbiguousOverload { pos: usize, name: String },
    #[error("cannot unify {lhs} with {rhs}")]
    UnifyFailure { lhs: String, rhs: String },
}

pub type Subst = HashMap<(u32, String), Type>;

type Params = Vec<(String, Type)>;

pub fn resolve(t: &Type, s: &Subst) -> Type {
    match t {
        Type::Param(k, n) => match s.get(&(*k, n.clone())) {
            Some(u) => resolve(u, s),
            None => t.clone(),
        },
        Type::Applied(a, op) => Type::Applied(Box::new(resolve(a, s)), op.clone()),
        _ => t.clone(),
    }
}

/// Extend `s` with a most general unifier of `a` and `b`.
pub fn unify(a: &Type, b: &Type, s: &Subst) -> Result<Subst, TypeError> {
    let (a, b) = (resolve(a, s), resolve(b, s));
    let fail = || TypeError::UnifyFailure { lhs: a.to_string(), rhs: b.to_string() };
    match (&a, &b) {
        _ if a == b => Ok(s.clone()),
        (Type::Param(k, n), t) | (t, Type::Param(k, n)) => {
            if t.mentions(*k, n) {
                return Err(fail());
            }
            let mut s = s.clone();
            s.insert((*k, n.clone()), t.clone());
            Ok(s)
        }
        (Type::Applied(x, f), Type::Applied(y, g)) if f == g => unify(x, y, s),
        _ => Err(fail()),
    }
}

type Inst = Rc<HashMap<String, Type>>;

#[derive(Debug, Clone)]
enum Item {
    Op(Rc<Signature>),
    Sym(Rc<OperatorSig>),
}

#[derive(Debug, Clone)]
struct Scoped {
    name: String,
    item: Item,
    inst: Inst,
    level: Option<String>,
}

/// Solved type parameters of one application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppTypes {
    pub pos: usize,
    pub head: String,
    pub params: Vec<(String, Type)>,
}

impl fmt::Display for AppTypes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.pos, self.head)?;
        for (k, (n, t)) in self.params.iter().enumerate() {
            write!(f, "{}{n}={t}", if k == 0 { ": " } else { ", " })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Inferred {
    pub ty: Type,
    pub apps: Vec<AppTypes>,
}

#[derive(Debug, Clone)]
pub struct Typer {
    scope: Vec<Scoped>,
    subst: Subst,
    next_app: u32,
    next_fresh: u32,
    pending: Vec<(usize, String, Params)>,
}

const ARITHMETIC: [&str; 4] = ["+", "-", "*", "/"];
const COMPARISON: [&str; 6] = ["=", "<>", "<", ">", "<=", ">="];

impl Default for Typer {
    fn default() -> Self {
        Typer::new()
    }
}

fn pos_of(e: &Expr) -> usize {
    match e {
        Expr::Apply(a) => a.span.0,
        Expr::Infix { span, .. } | Expr::Def { span, .. } => span.0,
        _ => 0,
    }
}

impl Typer {
    /// Integer arithmetic and comparisons, plus equality on strings.
    pub fn new() -> Typer {
        let mut t = Typer { scope: Vec::new(), subst: Subst::new(), next_app: 0, next_fresh: 0, pending: Vec::new() };
        for op in ARITHMETIC {
            t.bind_operator(parse_operator_signature(&format!("{op} (int, int): int")).unwrap());
        }
        for op in COMPARISON {
            t.bind_operator(parse_operator_signature(&format!("{op} (int, int): bool")).unwrap());
        }
        for op in ["=", "<>"] {
            t.bind_operator(parse_operator_signature(&format!("{op} (string, string): bool")).unwrap());
        }
        t
    }

    pub fn bind_op(&mut self, sig: Signature) {
        self.scope.push(Scoped { name: sig.name.clone(), item: Item::Op(Rc::new(sig)), inst: Inst::default(), level: None });
    }

    pub fn bind_operator(&mut self, sig: OperatorSig) {
        self.scope.push(Scoped { name: sig.symbol.clone(), item: Item::Sym(Rc::new(sig)), inst: Inst::default(), level: None });
    }

    pub fn infer(&mut self, e: &Expr) -> Result<Inferred, TypeError> {
        self.pending.clear();
        let mark = self.scope.len();
        let saved = self.subst.clone();
        let r = self.expr(e);
        self.scope.truncate(mark);
        let r = r.map(|ty| {
            let ty = resolve(&ty, &self.subst);
            let apps = self
                .pending
                .iter()
                .map(|(pos, head, ps)| AppTypes {
                    pos: *pos,
                    head: head.clone(),
                    params: ps.iter().map(|(n, t)| (n.clone(), resolve(t, &self.subst))).collect(),
                })
                .collect();
            Inferred { ty, apps }
        });
        self.subst = saved;
        r
    }

    fn type_of(&self, t: &TypeExpr, inst: &HashMap<String, Type>) -> Type {
        let mut names = t.0.iter();
        let Some(base) = names.next() else { return Type::void() };
        let mut ty = inst.get(base).cloned().unwrap_or_else(|| Type::Ground(base.clone()));
        for op in names {
            let op = match inst.get(op) {
                Some(Type::Ground(g)) => g.clone(),
                _ => op.clone(),
            };
            ty = Type::Applied(Box::new(ty), op);
        }
        ty
    }

    fn with_params(&mut self, inst: &Inst, tps: &[TypeParam]) -> (u32, Inst) {
        self.next_app += 1;
        let k = self.next_app;
        if tps.is_empty() {
            return (k, inst.clone());
        }
        let mut m = (**inst).clone();
        for tp in tps {
            m.insert(tp.name.clone(), Type::Param(k, tp.name.clone()));
        }
        (k, Rc::new(m))
    }

    fn with_fresh(&mut self, inst: &Inst, tps: &[TypeParam]) -> Inst {
        if tps.is_empty() {
            return inst.clone();
        }
        let mut m = (**inst).clone();
        for tp in tps {
            self.next_fresh += 1;
            m.insert(tp.name.clone(), Type::Fresh(self.next_fresh, tp.name.clone()));
        }
        Rc::new(m)
    }

    fn push_members(&mut self, sig: &Signature, inst: &Inst, level: Option<String>) {
        for p in &sig.params {
            let item = match p {
                ParamSpec::ByName(s) | ParamSpec::ByValue(s) => Item::Op(Rc::new(s.clone())),
                ParamSpec::Operator(o) => Item::Sym(Rc::new(o.clone())),
            };
            self.scope.push(Scoped { name: p.name().to_string(), item, inst: inst.clone(), level: level.clone() });
        }
    }

    /// `found` must fit `expected`; anything fits `void`.
    fn expect(&mut self, expected: &Type, found: &Type, pos: usize) -> Result<(), TypeError> {
        let e = resolve(expected, &self.subst);
        if e == Type::void() {
            return Ok(());
        }
        match unify(&e, found, &self.subst) {
            Ok(s) => {
                self.subst = s;
                Ok(())
            }
            Err(_) => Err(TypeError::TypeMismatch {
                pos,
                expected: e.to_string(),
                found: resolve(found, &self.subst).to_string(),
            }),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<Type, TypeError> {
        match e {
            Expr::Int(_) => Ok(Type::int()),
            Expr::Str(_) => Ok(Type::ground("string")),
            Expr::Seq(ms) | Expr::Block(ms) => {
                let mut t = Type::void();
                for m in ms {
                    t = self.expr(m)?;
                }
                Ok(t)
            }
            Expr::List(items) => Err(TypeError::UnknownOperator { pos: items.first().map_or(0, pos_of), name: "[..]".into() }),
            Expr::Apply(a) => self.apply(a),
            Expr::Infix { op, owner, lhs, rhs, span } => {
                let lt = self.expr(lhs)?;
                let rt = self.expr(rhs)?;
                self.infix(op, owner.as_deref(), &lt, &rt, span.0)
            }
            Expr::Def { sig, body, app, .. } => {
                let mark = self.scope.len();
                let (k, inst) = self.with_params(&Inst::default(), &sig.type_params);
                self.bind_op(sig.clone());
                self.push_members(sig, &inst, None);
                let bt = self.expr(body);
                self.scope.truncate(mark);
                let bt = bt?;
                let expected = match &sig.result {
                    Some(r) => self.type_of(r, &inst),
                    None => Type::Param(k, "result".into()),
                };
                self.expect(&expected, &bt, pos_of(body))?;
                let Some(app) = app else { return Ok(Type::void()) };
                self.bind_op(sig.clone());
                let t = self.expr(app);
                self.scope.truncate(mark);
                t
            }
        }
    }

    fn infix(&mut self, op: &str, owner: Option<&str>, lt: &Type, rt: &Type, pos: usize) -> Result<Type, TypeError> {
        let candidates: Vec<(Rc<OperatorSig>, Inst)> = self
            .scope
            .iter()
            .rev()
            .filter(|s| s.name == op && (owner.is_none() || s.level.as_deref() == owner))
            .filter_map(|s| match &s.item {
                Item::Sym(o) => Some((o.clone(), s.inst.clone())),
                Item::Op(_) => None,
            })
            .collect();
        if candidates.is_empty() {
            return Err(TypeError::UnknownOperator { pos, name: op.to_string() });
        }
        let mut fits = Vec::new();
        for (o, inst) in &candidates {
            let (_, inst) = self.with_params(inst, &o.type_params);
            let l = self.type_of(&o.lhs, &inst);
            let r = self.type_of(&o.rhs, &inst);
            let s = unify(&l, lt, &self.subst).and_then(|s| unify(&r, rt, &s));
            if let Ok(s) = s {
                let exact = o.type_params.is_empty();
                fits.push((s, self.type_of(&o.result, &inst), exact));
            }
        }
        let exact = fits.iter().filter(|f| f.2).count();
        if exact > 1 {
            return Err(TypeError::AmbiguousOverload { pos, name: op.to_string() });
        }
        let pick = if exact == 1 { fits.into_iter().find(|f| f.2) } else { fits.into_iter().next() };
        match pick {
            Some((s, result, _)) => {
                self.subst = s;
                Ok(resolve(&result, &self.subst))
            }
            None => {
                let (o, inst) = &candidates[0];
                Err(TypeError::TypeMismatch {
                    pos,
                    expected: format!("({}, {})", self.type_of(&o.lhs, inst), self.type_of(&o.rhs, inst)),
                    found: format!("({}, {})", resolve(lt, &self.subst), resolve(rt, &self.subst)),
                })
            }
        }
    }

    fn apply(&mut self, a: &Apply) -> Result<Type, TypeError> {
        let found = self.scope.iter().rev().find_map(|s| match &s.item {
            Item::Op(sig) if s.name == a.op && (a.qualifier.is_none() || s.level == a.qualifier) => {
                Some((sig.clone(), s.inst.clone()))
            }
            _ => None,
        });
        let Some((sig, inst)) = found else {
            return Err(TypeError::UnknownOperator { pos: a.span.0, name: a.op.clone() });
        };
        let (k, inst) = self.with_params(&inst, &sig.type_params);
        for (p, arg) in sig.params.iter().zip(&a.args) {
            match p {
                ParamSpec::ByValue(ps) => {
                    let t = self.expr(&arg.body)?;
                    let expected = ps.result.as_ref().map_or_else(Type::void, |r| self.type_of(r, &inst));
                    self.expect(&expected, &t, pos_of(&arg.body).max(a.span.0))?;
                }
                ParamSpec::ByName(ps) => {
                    let inner = self.with_fresh(&inst, &ps.type_params);
                    let mark = self.scope.len();
                    self.push_members(ps, &inner, arg.label.clone());
                    let t = self.expr(&arg.body);
                    self.scope.truncate(mark);
                    let t = t?;
                    let expected = ps.result.as_ref().map_or_else(Type::void, |r| self.type_of(r, &inner));
                    self.expect(&expected, &t, pos_of(&arg.body).max(a.span.0))?;
                }
                ParamSpec::Operator(_) => {}
            }
        }
        if !sig.type_params.is_empty() {
            let ps = sig.type_params.iter().map(|tp| (tp.name.clone(), Type::Param(k, tp.name.clone()))).collect();
            self.pending.push((a.span.0, a.op.clone(), ps));
        }
        Ok(sig.result.as_ref().map_or_else(Type::void, |r| self.type_of(r, &inst)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{desugar, parse_expression, parse_signature, SigEnv};

    const TWICE: &str = "twice OF W [F[x:int]:int][Return[f[X:int]:int]:W]:W";

    fn check(sigs: &[&str], ops: &[&str], src: &str) -> Result<Inferred, TypeError> {
        let mut env = SigEnv::new();
        let mut typer = Typer::new();
        for s in sigs {
            let sig = parse_signature(s).unwrap();
            env.bind_op(sig.clone());
            typer.bind_op(sig);
        }
        for o in ops {
            typer.bind_operator(parse_operator_signature(o).unwrap());
        }
        let core = desugar(&parse_expression(src).unwrap(), &mut env).unwrap();
        typer.infer(&core)
    }

    fn solved(r: &Inferred, head: &str, param: &str) -> Type {
        let app = r.apps.iter().find(|a| a.head == head).unwrap();
        app.params.iter().find(|(n, _)| n == param).unwrap().1.clone()
    }

    #[test]
    fn twice_result_follows_return() {
        let out = check(
            &[TWICE, "stdout:Output", "nl:string"],
            &["<< OF T (Output, T): Output"],
            "twice{x*x}{stdout << f{2} << nl}",
        )
        .unwrap();
        assert_eq!(out.ty, Type::ground("Output"));
        assert_eq!(solved(&out, "twice", "W"), Type::ground("Output"));
        let out = check(&[TWICE], &[], "twice{x*x}{f{2}}").unwrap();
        assert_eq!(solved(&out, "twice", "W"), Type::int());
    }

    #[test]
    fn cons_onto_nil() {
        let out = check(&["nil OF T : T List"], &[":: OF T (T, T List): T List"], "3 :: nil").unwrap();
        assert_eq!(out.ty.to_string(), "int List");
        assert!(check(&["nil OF T : T List"], &[":: OF T (T, T List): T List"], "3 :: 4").is_err());
    }

    #[test]
    fn unify_cases() {
        let s = unify(&Type::Param(1, "W".into()), &Type::int(), &Subst::new()).unwrap();
        assert_eq!(resolve(&Type::Param(1, "W".into()), &s), Type::int());
        assert!(unify(&Type::Fresh(1, "PIPE".into()), &Type::Fresh(2, "PIPE".into()), &Subst::new()).is_err());
        let arr = |t| Type::Applied(Box::new(t), "Array".into());
        let s = unify(&arr(Type::int()), &arr(Type::Param(3, "T".into())), &Subst::new()).unwrap();
        assert_eq!(resolve(&Type::Param(3, "T".into()), &s), Type::int());
        assert!(unify(&Type::Param(1, "T".into()), &arr(Type::Param(1, "T".into())), &Subst::new()).is_err());
    }

    #[test]
    fn member_types_are_generative() {
        let unix = "pipe OF w [Scope OF PIPE [mk:PIPE] [use[p:PIPE]:int]:w]:w";
        assert!(check(&[unix], &[], "pipe S:{ S.use{S.mk} }").is_ok());
        let err = check(&[unix], &[], "pipe S:{ pipe T:{ T.use{S.mk} } }").unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn by_value_arguments_are_checked() {
        let iff = "if OF T (C:bool) [Then:T] [Else:T] : T";
        assert_eq!(check(&[iff], &[], "if(1 < 2, 3, 4)").unwrap().ty, Type::int());
        assert!(check(&[iff], &[], "if(1, 3, 4)").is_err());
        assert!(check(&[iff], &[], "if(1 < 2, 3, \"a\")").is_err());
    }

    #[test]
    fn var_cells() {
        let var = "var OF w, rvalue [Scope OF lvalue (__:lvalue) [_:rvalue] [:=(lvalue,rvalue) : rvalue]:w]:w";
        let out = check(&[var], &[], "var x; x := 3; x + 1").unwrap();
        assert_eq!(out.ty, Type::int());
        assert_eq!(solved(&out, "var", "rvalue"), Type::int());
        assert!(check(&[var], &[], "var x; x := 3; x := \"s\"; 0").is_err());
    }

    #[test]
    fn unknown_operator() {
        assert!(matches!(check(&["a:int"], &[], "a ++ a"), Err(TypeError::UnknownOperator { .. })));
    }
}
