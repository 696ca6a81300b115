//! Signatures and expression trees.
//!
//! One [`Expr`] type serves both as the raw parse result and as the desugared
//! core form. After desugaring, `Block`, `List` and declaration forms
//! (`Def` without an application body, `Apply` with `decl_label`) are gone and
//! every `Apply` is arity-saturated.

use std::fmt;

/// Source byte offset. Compares equal to every other span so that structural
/// equality of trees ignores positions.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span(pub usize);

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _state: &mut H) {}
}

/// A postfix type application chain: `string Array` is `Array` applied to
/// `string`. The last name is the outermost operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeExpr(pub Vec<String>);

impl TypeExpr {
    pub fn named(name: &str) -> Self {
        TypeExpr(vec![name.to_string()])
    }

    pub fn head(&self) -> &str {
        self.0.last().map(String::as_str).unwrap_or("")
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeParam {
    /// Declared operator arity (`OF 2 Pair`); `None` means 0.
    pub arity: Option<u32>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub type_params: Vec<TypeParam>,
    pub params: Vec<ParamSpec>,
    pub result: Option<TypeExpr>,
}

impl Signature {
    pub fn nullary(name: &str) -> Self {
        Signature { name: name.to_string(), type_params: Vec::new(), params: Vec::new(), result: None }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(ParamSpec::name)
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name() == name)
    }

    /// True when this signature or any nested one requests call-by-value.
    pub fn has_by_value(&self) -> bool {
        self.params.iter().any(|p| match p {
            ParamSpec::ByValue(_) => true,
            ParamSpec::ByName(s) => s.has_by_value(),
            ParamSpec::Operator(o) => o.by_value,
        })
    }
}

/// Signature of an operator symbol: `:=(lvalue,rvalue) : rvalue`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSig {
    pub symbol: String,
    pub type_params: Vec<TypeParam>,
    pub lhs: TypeExpr,
    pub rhs: TypeExpr,
    pub result: TypeExpr,
    /// Declared inside a parenthesized value list.
    pub by_value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamSpec {
    ByName(Signature),
    /// Declared in a parenthesized value list; always carries a result type.
    ByValue(Signature),
    Operator(OperatorSig),
}

impl ParamSpec {
    pub fn name(&self) -> &str {
        match self {
            ParamSpec::ByName(s) | ParamSpec::ByValue(s) => &s.name,
            ParamSpec::Operator(o) => &o.symbol,
        }
    }

    /// The nested signature for named parameters.
    pub fn signature(&self) -> Option<&Signature> {
        match self {
            ParamSpec::ByName(s) | ParamSpec::ByValue(s) => Some(s),
            ParamSpec::Operator(_) => None,
        }
    }

    pub fn is_by_value(&self) -> bool {
        match self {
            ParamSpec::ByValue(_) => true,
            ParamSpec::ByName(_) => false,
            ParamSpec::Operator(o) => o.by_value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Passing {
    /// `{ ... }`
    Braces,
    /// One element of a parenthesized `( a, b )` list.
    Values,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arg {
    /// Level name written before the argument (`L: {..}`).
    pub label: Option<String>,
    pub body: Expr,
    pub passing: Passing,
}

impl Arg {
    pub fn braced(body: Expr) -> Self {
        Arg { label: None, body, passing: Passing::Braces }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Apply {
    pub op: String,
    pub qualifier: Option<String>,
    pub args: Vec<Arg>,
    /// Trailing level name of a declaration (`var x;`): names the absorbed
    /// argument. Raw form only.
    pub decl_label: Option<String>,
    pub span: Span,
}

impl Apply {
    pub fn new(op: &str, args: Vec<Arg>) -> Self {
        Apply { op: op.to_string(), qualifier: None, args, decl_label: None, span: Span::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Seq(Vec<Expr>),
    Apply(Apply),
    Infix {
        op: String,
        /// Level whose member operator this is (`x` in `x.__ := ...`).
        owner: Option<String>,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        span: Span,
    },
    Int(i64),
    Str(String),
    Def {
        sig: Signature,
        body: Box<Expr>,
        /// `None` for the declaration form `DEF sig {body};` (raw only).
        app: Option<Box<Expr>>,
        span: Span,
    },
    /// A brace group that is not an argument (raw only).
    Block(Vec<Expr>),
    /// `[a, b, c]` (raw only).
    List(Vec<Expr>),
}

impl Expr {
    pub fn name(n: &str) -> Expr {
        Expr::Apply(Apply::new(n, Vec::new()))
    }

    pub fn apply(op: &str, args: Vec<Expr>) -> Expr {
        Expr::Apply(Apply::new(op, args.into_iter().map(Arg::braced).collect()))
    }

    pub fn infix(op: &str, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Infix { op: op.to_string(), owner: None, lhs: Box::new(lhs), rhs: Box::new(rhs), span: Span::default() }
    }

    /// Wrap members as one expression: a single member stands for itself.
    pub fn seq(mut members: Vec<Expr>) -> Expr {
        if members.len() == 1 {
            members.pop().unwrap()
        } else {
            Expr::Seq(members)
        }
    }

    /// Every operation name applied (unqualified) anywhere in this tree.
    pub fn applied_names(&self, out: &mut Vec<String>) {
        match self {
            Expr::Seq(ms) | Expr::Block(ms) | Expr::List(ms) => ms.iter().for_each(|m| m.applied_names(out)),
            Expr::Apply(a) => {
                if a.qualifier.is_none() {
                    out.push(a.op.clone());
                }
                a.args.iter().for_each(|arg| arg.body.applied_names(out));
            }
            Expr::Infix { lhs, rhs, .. } => {
                lhs.applied_names(out);
                rhs.applied_names(out);
            }
            Expr::Int(_) | Expr::Str(_) => {}
            Expr::Def { body, app, .. } => {
                body.applied_names(out);
                if let Some(app) = app {
                    app.applied_names(out);
                }
            }
        }
    }
}
