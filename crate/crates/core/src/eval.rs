//! Copy-rule interpreter. By-name arguments are closures evaluated on every
//! reference; by-value arguments are evaluated once, when the call is made.

use std::cell::RefCell;
use std::fmt;
use std::io::Write;
use std::rc::Rc;

use thiserror::Error;

use crate::syntax::{
    desugar, input_complete, parse_program, Arg, DesugarError, Expr, OperatorSig, ParamSpec, SigEnv, Signature,
    SyntaxError,
};
use crate::types::TypeError;

pub const DEFAULT_FUEL: u64 = 10_000_000;
pub const DEFAULT_DEPTH: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Port {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Str(Rc<str>),
    Bool(bool),
    Unit,
    List(Rc<Vec<Value>>),
    Cell(usize),
    Port(Port),
}

impl Value {
    /// Whether a REPL shows this value.
    pub fn is_shown(&self) -> bool {
        !matches!(self, Value::Unit | Value::Port(_) | Value::Cell(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Str(s) => f.write_str(s),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => f.write_str("()"),
            Value::List(vs) => {
                f.write_str("[")?;
                for (k, v) in vs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Cell(c) => write!(f, "cell#{c}"),
            Value::Port(Port::Input) => f.write_str("Input"),
            Value::Port(Port::Output) => f.write_str("Output"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    Print(String),
    Assign(usize, Value),
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::Print(s) => write!(f, "PRINT {}", s.escape_default()),
            Effect::Assign(c, v) => write!(f, "ASSIGN {c} {}", v.to_string().escape_default()),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("runtime type error: {what}")]
    RuntimeTypeError { what: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("overflow in {lhs} {op} {rhs}")]
    Overflow { op: String, lhs: i64, rhs: i64 },
    #[error("no result within {fuel} steps")]
    FuelExhausted { fuel: u64 },
    #[error("evaluation nested deeper than {depth}")]
    TooDeep { depth: usize },
    #[error("`{name}` is not bound")]
    UnboundName { name: String },
    #[error("variable read before assignment")]
    Uninitialised,
    #[error("`{op}` is declared but not implemented")]
    Unimplemented { op: String },
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Desugar(#[from] DesugarError),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
    #[error("output: {0}")]
    Io(String),
}

/// Builtin operations.
#[derive(Debug, Clone)]
pub enum Builtin {
    If,
    Var,
    While,
    Loop,
    Induction,
    SplitList,
    Nil,
    Stdout,
    Nl,
    Sort,
    Interpret,
    Unimplemented,
    /// `_` of a `var` scope.
    Read(usize),
    /// `result` inside an `induction` step.
    Recurse(Rc<Operation>),
    /// `put` inside the sending phase of `sort`.
    Put(Rc<RefCell<Vec<Value>>>),
    /// `all` inside the receiving phase of `sort`.
    All(Rc<Vec<Value>>),
}

#[derive(Debug, Clone)]
pub enum Imp {
    Defined { body: Rc<Expr>, env: Env },
    /// An argument passed by name, with the environment of the caller.
    Arg { body: Rc<Expr>, env: Env, label: Option<String> },
    Builtin(Builtin),
}

#[derive(Debug)]
pub struct Operation {
    pub sig: Rc<Signature>,
    pub imp: Imp,
}

#[derive(Debug, Clone)]
pub enum Kind {
    Op(Rc<Operation>),
    Value(Value),
    /// Member `:=` of a `var` scope.
    Assign(Rc<OperatorSig>),
    /// A level name introduced by an argument label.
    Level(Rc<Signature>),
}

#[derive(Debug)]
struct Node {
    name: String,
    level: Option<String>,
    /// Declared signature for operations and values.
    sig: Option<Rc<Signature>>,
    kind: Kind,
    next: Env,
}

/// Persistent environment; later bindings shadow earlier ones.
#[derive(Debug, Clone, Default)]
pub struct Env(Option<Rc<Node>>);

impl Env {
    pub fn new() -> Env {
        Env(None)
    }

    fn push(&self, name: &str, level: Option<String>, sig: Option<Rc<Signature>>, kind: Kind) -> Env {
        Env(Some(Rc::new(Node { name: name.to_string(), level, sig, kind, next: self.clone() })))
    }

    pub fn bind_op(&self, op: Rc<Operation>) -> Env {
        let name = op.sig.name.clone();
        let sig = op.sig.clone();
        self.push(&name, None, Some(sig), Kind::Op(op))
    }

    pub fn bind_builtin(&self, sig: Signature, b: Builtin) -> Env {
        self.bind_op(Rc::new(Operation { sig: Rc::new(sig), imp: Imp::Builtin(b) }))
    }

    pub fn define(&self, sig: Signature, body: Expr) -> Env {
        self.bind_op(Rc::new(Operation { sig: Rc::new(sig), imp: Imp::Defined { body: Rc::new(body), env: self.clone() } }))
    }

    fn iter(&self) -> impl Iterator<Item = &Node> {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let n = cur?;
            cur = n.next.0.as_deref();
            Some(n)
        })
    }

    fn lookup(&self, name: &str, qualifier: Option<&str>) -> Option<&Node> {
        self.iter().find(|n| match qualifier {
            Some(q) => n.level.as_deref() == Some(q) && n.name == name,
            None => n.name == name && !matches!(n.kind, Kind::Level(_)),
        })
    }

    /// The signatures visible here, for desugaring input in context.
    pub fn sig_env(&self) -> SigEnv {
        let nodes: Vec<&Node> = self.iter().collect();
        let mut env = SigEnv::new();
        for n in nodes.into_iter().rev() {
            match (&n.kind, &n.sig) {
                (Kind::Level(s), _) => env.bind_level(&n.name, s.clone()),
                (Kind::Assign(o), _) => env.bind_opsym((**o).clone()),
                (_, Some(s)) => env.bind_op((**s).clone()),
                (_, None) => {}
            }
        }
        env
    }

    /// Signatures of the operations bound at top level, oldest first.
    pub fn signatures(&self) -> Vec<Rc<Signature>> {
        let mut out: Vec<Rc<Signature>> =
            self.iter().filter(|n| n.level.is_none()).filter_map(|n| n.sig.clone()).collect();
        out.reverse();
        out
    }

    pub fn operation(&self, name: &str) -> Option<Rc<Operation>> {
        match self.lookup(name, None).map(|n| &n.kind) {
            Some(Kind::Op(op)) => Some(op.clone()),
            _ => None,
        }
    }
}

/// Source of input lines for `INTERPRET`.
pub trait LineSource {
    fn read_line(&mut self) -> Option<String>;
}

/// Lines from a fixed list.
pub struct Lines(pub std::collections::VecDeque<String>);

impl Lines {
    pub fn new(text: &str) -> Lines {
        Lines(text.lines().map(str::to_string).collect())
    }
}

impl LineSource for Lines {
    fn read_line(&mut self) -> Option<String> {
        self.0.pop_front()
    }
}

/// Lines from standard input.
pub struct Stdin;

impl LineSource for Stdin {
    fn read_line(&mut self) -> Option<String> {
        let mut s = String::new();
        match std::io::stdin().read_line(&mut s) {
            Ok(0) | Err(_) => None,
            Ok(_) => Some(s.trim_end_matches(['\n', '\r']).to_string()),
        }
    }
}

/// Memory cells, the effect log and the output sink.
#[derive(Default)]
pub struct Store {
    cells: Vec<Option<Value>>,
    pub log: Vec<Effect>,
    sink: Option<Box<dyn Write>>,
    /// Everything written, prompts included.
    pub transcript: String,
}

impl Store {
    pub fn with_sink(sink: Box<dyn Write>) -> Store {
        Store { sink: Some(sink), ..Store::default() }
    }

    fn write(&mut self, text: &str) -> Result<(), EvalError> {
        self.transcript.push_str(text);
        if let Some(s) = &mut self.sink {
            s.write_all(text.as_bytes()).map_err(|e| EvalError::Io(e.to_string()))?;
            if text.contains('\n') || !text.ends_with(' ') {
                s.flush().map_err(|e| EvalError::Io(e.to_string()))?;
            }
        }
        Ok(())
    }

    fn print(&mut self, text: String) -> Result<(), EvalError> {
        self.write(&text)?;
        self.log.push(Effect::Print(text));
        Ok(())
    }

    pub fn effect_dump(&self) -> String {
        self.log.iter().map(|e| format!("{e}\n")).collect()
    }
}

pub struct Interp {
    pub store: Store,
    pub fuel: u64,
    used: u64,
    /// Limit on nested evaluation.
    pub max_depth: usize,
    nesting: usize,
    input: Option<Box<dyn LineSource>>,
    /// Write each input line after its prompt.
    pub echo: bool,
    /// Input counters per nesting level; index 0 is the top level.
    pub counters: Vec<u32>,
    depth: usize,
    exit_loop: bool,
}

fn int(v: &Value, what: &str) -> Result<i64, EvalError> {
    match v {
        Value::Int(n) => Ok(*n),
        _ => Err(EvalError::RuntimeTypeError { what: format!("{what} needs an int, got {v}") }),
    }
}

fn truth(v: &Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Int(n) => Ok(*n != 0),
        _ => Err(EvalError::RuntimeTypeError { what: format!("condition must be bool, got {v}") }),
    }
}

fn member_sig(sig: &Signature, k: usize) -> Option<Rc<Signature>> {
    sig.params.get(k).and_then(ParamSpec::signature).map(|s| Rc::new(s.clone()))
}

/// The prompt for input `n` at nesting `depth`: `. 1> ` or `2> `.
pub fn prompt(depth: usize, n: u32) -> String {
    if depth == 0 {
        format!("{n}> ")
    } else {
        format!("{} {n}> ", ".".repeat(depth))
    }
}

impl Default for Interp {
    fn default() -> Self {
        Interp::new(Store::default())
    }
}

impl Interp {
    pub fn new(store: Store) -> Interp {
        Interp { store, fuel: DEFAULT_FUEL, used: 0, max_depth: DEFAULT_DEPTH, nesting: 0, input: None, echo: false, counters: vec![0], depth: 0, exit_loop: false }
    }

    pub fn with_input(mut self, input: Box<dyn LineSource>) -> Interp {
        self.input = Some(input);
        self
    }

    pub fn write(&mut self, text: &str) -> Result<(), EvalError> {
        self.store.write(text)
    }

    /// Read lines until they form a complete input. `None` at end of input.
    pub fn read_input(&mut self, depth: usize) -> Option<String> {
        while self.counters.len() <= depth {
            self.counters.push(0);
        }
        let mut buf = String::new();
        loop {
            self.counters[depth] += 1;
            let p = prompt(depth, self.counters[depth]);
            let _ = self.store.write(&p);
            let Some(line) = self.input.as_mut().and_then(|i| i.read_line()) else {
                if self.echo || self.input.is_some() {
                    let _ = self.store.write("\n");
                }
                return (!buf.trim().is_empty()).then_some(buf);
            };
            if self.echo {
                let _ = self.store.write(&format!("{line}\n"));
            }
            buf.push_str(&line);
            buf.push('\n');
            if !buf.trim().is_empty() && input_complete(&buf) {
                return Some(buf);
            }
        }
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        self.used += 1;
        if self.used > self.fuel {
            return Err(EvalError::FuelExhausted { fuel: self.fuel });
        }
        Ok(())
    }

    pub fn eval(&mut self, e: &Expr, env: &Env) -> Result<Value, EvalError> {
        self.tick()?;
        if self.nesting >= self.max_depth {
            return Err(EvalError::TooDeep { depth: self.max_depth });
        }
        self.nesting += 1;
        let r = self.eval_inner(e, env);
        self.nesting -= 1;
        r
    }

    fn eval_inner(&mut self, e: &Expr, env: &Env) -> Result<Value, EvalError> {
        match e {
            Expr::Int(v) => Ok(Value::Int(*v)),
            Expr::Str(s) => Ok(Value::Str(s.as_str().into())),
            Expr::Seq(ms) | Expr::Block(ms) => {
                let mut v = Value::Unit;
                for m in ms {
                    v = self.eval(m, env)?;
                }
                Ok(v)
            }
            Expr::List(items) => {
                let vs = items.iter().map(|i| self.eval(i, env)).collect::<Result<Vec<_>, _>>()?;
                Ok(Value::List(Rc::new(vs)))
            }
            Expr::Def { sig, body, app, .. } => {
                let env = env.define(sig.clone(), (**body).clone());
                match app {
                    Some(a) => self.eval(a, &env),
                    None => Ok(Value::Unit),
                }
            }
            Expr::Apply(a) => {
                let node = env
                    .lookup(&a.op, a.qualifier.as_deref())
                    .ok_or_else(|| EvalError::UnboundName { name: a.op.clone() })?;
                match &node.kind {
                    Kind::Value(v) if a.args.is_empty() => Ok(v.clone()),
                    Kind::Op(op) => {
                        let op = op.clone();
                        self.call(&op, &a.args, env)
                    }
                    _ => Err(EvalError::RuntimeTypeError { what: format!("`{}` cannot be applied here", a.op) }),
                }
            }
            Expr::Infix { op, lhs, rhs, .. } => {
                let l = self.eval(lhs, env)?;
                let r = self.eval(rhs, env)?;
                self.infix(op, l, r)
            }
        }
    }

    fn infix(&mut self, op: &str, l: Value, r: Value) -> Result<Value, EvalError> {
        let arith = |f: fn(i64, i64) -> Option<i64>| -> Result<Value, EvalError> {
            let (a, b) = (int(&l, op)?, int(&r, op)?);
            f(a, b).map(Value::Int).ok_or(EvalError::Overflow { op: op.to_string(), lhs: a, rhs: b })
        };
        match op {
            "+" => arith(i64::checked_add),
            "-" => arith(i64::checked_sub),
            "*" => arith(i64::checked_mul),
            "/" => {
                if r == Value::Int(0) {
                    return Err(EvalError::DivisionByZero);
                }
                arith(i64::checked_div)
            }
            "=" => Ok(Value::Bool(l == r)),
            "<>" => Ok(Value::Bool(l != r)),
            "<" | ">" | "<=" | ">=" => {
                let (a, b) = (int(&l, op)?, int(&r, op)?);
                Ok(Value::Bool(match op {
                    "<" => a < b,
                    ">" => a > b,
                    "<=" => a <= b,
                    _ => a >= b,
                }))
            }
            ":=" => match l {
                Value::Cell(c) => {
                    self.store.cells[c] = Some(r.clone());
                    self.store.log.push(Effect::Assign(c, r.clone()));
                    Ok(r)
                }
                _ => Err(EvalError::RuntimeTypeError { what: format!("cannot assign to {l}") }),
            },
            "::" => match r {
                Value::List(vs) => {
                    let mut out = Vec::with_capacity(vs.len() + 1);
                    out.push(l);
                    out.extend(vs.iter().cloned());
                    Ok(Value::List(Rc::new(out)))
                }
                _ => Err(EvalError::RuntimeTypeError { what: format!("`::` needs a list, got {r}") }),
            },
            "<<" => match l {
                Value::Port(Port::Output) => {
                    self.store.print(r.to_string())?;
                    Ok(l)
                }
                _ => Err(EvalError::RuntimeTypeError { what: format!("`<<` needs Output, got {l}") }),
            },
            _ => Err(EvalError::UnboundName { name: op.to_string() }),
        }
    }

    /// `base` extended with the parameters of `sig` bound to `args`.
    fn bind_params(&mut self, base: Env, sig: &Signature, args: &[Arg], caller: &Env, level: Option<String>) -> Result<Env, EvalError> {
        let mut env = base;
        if let Some(l) = &level {
            env = env.push(l, None, None, Kind::Level(Rc::new(sig.clone())));
        }
        for (p, a) in sig.params.iter().zip(args) {
            match p {
                ParamSpec::ByValue(ps) => {
                    let v = self.eval(&a.body, caller)?;
                    env = env.push(&ps.name, level.clone(), Some(Rc::new(ps.clone())), Kind::Value(v));
                }
                ParamSpec::ByName(ps) => {
                    let op = Operation {
                        sig: Rc::new(ps.clone()),
                        imp: Imp::Arg { body: Rc::new(a.body.clone()), env: caller.clone(), label: a.label.clone() },
                    };
                    env = env.push(&ps.name, level.clone(), Some(op.sig.clone()), Kind::Op(Rc::new(op)));
                }
                ParamSpec::Operator(_) => {}
            }
        }
        Ok(env)
    }

    pub fn call(&mut self, op: &Rc<Operation>, args: &[Arg], caller: &Env) -> Result<Value, EvalError> {
        match &op.imp {
            Imp::Defined { body, env } => {
                let base = env.bind_op(op.clone());
                let env = self.bind_params(base, &op.sig, args, caller, None)?;
                self.eval(body, &env)
            }
            Imp::Arg { body, env, label } => {
                let env = self.bind_params(env.clone(), &op.sig, args, caller, label.clone())?;
                self.eval(body, &env)
            }
            Imp::Builtin(b) => self.builtin(b, op, args, caller),
        }
    }

    /// A by-name argument as an operation of its parameter's signature.
    fn closure(sig: Option<Rc<Signature>>, a: &Arg, env: &Env) -> Rc<Operation> {
        Rc::new(Operation {
            sig: sig.unwrap_or_else(|| Rc::new(Signature::nullary("_"))),
            imp: Imp::Arg { body: Rc::new(a.body.clone()), env: env.clone(), label: a.label.clone() },
        })
    }

    /// Run closure `c` with its members bound to the given kinds.
    fn enter(&mut self, c: &Operation, members: Vec<(&str, Kind)>) -> Result<Value, EvalError> {
        let Imp::Arg { body, env, label } = &c.imp else {
            return Err(EvalError::RuntimeTypeError { what: "argument expected".into() });
        };
        let mut env = env.clone();
        if let Some(l) = label {
            env = env.push(l, None, None, Kind::Level(c.sig.clone()));
        }
        for (name, kind) in members {
            let sig = c.sig.param(name).and_then(ParamSpec::signature).map(|s| Rc::new(s.clone()));
            env = env.push(name, label.clone(), sig, kind);
        }
        let body = body.clone();
        self.eval(&body, &env)
    }

    fn builtin(&mut self, b: &Builtin, op: &Operation, args: &[Arg], caller: &Env) -> Result<Value, EvalError> {
        let sig = &op.sig;
        match b {
            Builtin::If => {
                if truth(&self.eval(&args[0].body, caller)?)? {
                    self.eval(&args[1].body, caller)
                } else {
                    self.eval(&args[2].body, caller)
                }
            }
            Builtin::Var => {
                let cell = self.store.cells.len();
                self.store.cells.push(None);
                let scope_sig = member_sig(sig, 0);
                let scope = Self::closure(scope_sig.clone(), &args[0], caller);
                let read = |s: &Option<Rc<Signature>>| {
                    let rs = s.as_ref().and_then(|s| member_sig(s, 1)).unwrap_or_else(|| Rc::new(Signature::nullary("_")));
                    Kind::Op(Rc::new(Operation { sig: rs, imp: Imp::Builtin(Builtin::Read(cell)) }))
                };
                let assign = scope_sig.as_ref().and_then(|s| {
                    s.params.iter().find_map(|p| match p {
                        ParamSpec::Operator(o) => Some(Rc::new(o.clone())),
                        _ => None,
                    })
                });
                let mut members = vec![("__", Kind::Value(Value::Cell(cell))), ("_", read(&scope_sig))];
                if let Some(o) = assign {
                    members.push((":=", Kind::Assign(o)));
                }
                self.enter(&scope, members)
            }
            Builtin::Read(cell) => self.store.cells[*cell].clone().ok_or(EvalError::Uninitialised),
            Builtin::While => {
                while truth(&self.eval(&args[0].body, caller)?)? {
                    self.eval(&args[1].body, caller)?;
                }
                Ok(Value::Unit)
            }
            Builtin::Loop => {
                loop {
                    self.eval(&args[0].body, caller)?;
                    if std::mem::take(&mut self.exit_loop) {
                        return Ok(Value::Unit);
                    }
                }
            }
            Builtin::Induction => {
                let initial = self.eval(&args[0].body, caller)?;
                let step = Self::closure(member_sig(sig, 1), &args[1], caller);
                self.induct(&step, initial)
            }
            Builtin::Recurse(step) => {
                let v = self.eval(&args[0].body, caller)?;
                let step = step.clone();
                self.induct(&step, v)
            }
            Builtin::SplitList => match self.eval(&args[0].body, caller)? {
                Value::List(vs) if vs.is_empty() => self.eval(&args[1].body, caller),
                Value::List(vs) => {
                    let cons = Self::closure(member_sig(sig, 2), &args[2], caller);
                    let tl = Value::List(Rc::new(vs[1..].to_vec()));
                    self.enter(&cons, vec![("hd", Kind::Value(vs[0].clone())), ("tl", Kind::Value(tl))])
                }
                v => Err(EvalError::RuntimeTypeError { what: format!("split_list needs a list, got {v}") }),
            },
            Builtin::Nil => Ok(Value::List(Rc::default())),
            Builtin::Stdout => Ok(Value::Port(Port::Output)),
            Builtin::Nl => Ok(Value::Str("\n".into())),
            Builtin::Sort => self.sort(sig, args, caller),
            Builtin::Put(buf) => {
                let v = self.eval(&args[0].body, caller)?;
                buf.borrow_mut().push(v);
                Ok(Value::Unit)
            }
            Builtin::All(items) => {
                let body = Self::closure(member_sig(sig, 0), &args[0], caller);
                for v in items.iter() {
                    self.enter(&body, vec![("x", Kind::Value(v.clone()))])?;
                }
                Ok(Value::Unit)
            }
            Builtin::Interpret => self.interpret(caller),
            Builtin::Unimplemented => Err(EvalError::Unimplemented { op: sig.name.clone() }),
        }
    }

    fn induct(&mut self, step: &Rc<Operation>, v: Value) -> Result<Value, EvalError> {
        let rsig = member_sig(&step.sig, 1).unwrap_or_else(|| Rc::new(Signature::nullary("result")));
        let result = Rc::new(Operation { sig: rsig, imp: Imp::Builtin(Builtin::Recurse(step.clone())) });
        self.enter(step, vec![("__", Kind::Value(v)), ("result", Kind::Op(result))])
    }

    fn sort(&mut self, sig: &Signature, args: &[Arg], caller: &Env) -> Result<Value, EvalError> {
        let order = Self::closure(member_sig(sig, 0), &args[0], caller);
        let send = Self::closure(member_sig(sig, 1), &args[1], caller);
        let receive = Self::closure(member_sig(sig, 2), &args[2], caller);
        let buf = Rc::new(RefCell::new(Vec::new()));
        let put_sig = member_sig(&send.sig, 0).unwrap_or_else(|| Rc::new(Signature::nullary("put")));
        let put = Rc::new(Operation { sig: put_sig, imp: Imp::Builtin(Builtin::Put(buf.clone())) });
        self.enter(&send, vec![("put", Kind::Op(put))])?;
        let items = buf.take();
        let sorted = self.merge_sort(&order, items)?;
        let all_sig = member_sig(&receive.sig, 0).unwrap_or_else(|| Rc::new(Signature::nullary("all")));
        let all = Rc::new(Operation { sig: all_sig, imp: Imp::Builtin(Builtin::All(Rc::new(sorted))) });
        self.enter(&receive, vec![("all", Kind::Op(all))])
    }

    /// Stable merge sort; `order(x, y)` true means `x` may precede `y`.
    fn merge_sort(&mut self, order: &Operation, mut items: Vec<Value>) -> Result<Vec<Value>, EvalError> {
        if items.len() < 2 {
            return Ok(items);
        }
        let right = items.split_off(items.len() / 2);
        let left = self.merge_sort(order, items)?;
        let right = self.merge_sort(order, right)?;
        let mut out = Vec::with_capacity(left.len() + right.len());
        let (mut i, mut j) = (0, 0);
        while i < left.len() && j < right.len() {
            let before = self.enter(order, vec![("x", Kind::Value(right[j].clone())), ("y", Kind::Value(left[i].clone()))])?;
            if truth(&before)? {
                out.push(right[j].clone());
                j += 1;
            } else {
                out.push(left[i].clone());
                i += 1;
            }
        }
        out.extend_from_slice(&left[i..]);
        out.extend_from_slice(&right[j..]);
        Ok(out)
    }

    /// Read one input at the next nesting level and evaluate it in `env`.
    /// End of input leaves the enclosing `loop`.
    fn interpret(&mut self, env: &Env) -> Result<Value, EvalError> {
        self.depth += 1;
        let depth = self.depth;
        let r = self.interpret_at(depth, env);
        self.depth -= 1;
        r
    }

    fn interpret_at(&mut self, depth: usize, env: &Env) -> Result<Value, EvalError> {
        let Some(src) = self.read_input(depth) else {
            self.exit_loop = true;
            self.counters.truncate(depth);
            return Ok(Value::Unit);
        };
        match self.eval_source(&src, env) {
            Ok(v) => {
                if v.is_shown() {
                    self.write(&format!("{v}\n"))?;
                }
                Ok(v)
            }
            Err(e @ (EvalError::FuelExhausted { .. } | EvalError::TooDeep { .. } | EvalError::Io(_))) => Err(e),
            Err(e) => {
                self.write(&format!("error: {e}\n"))?;
                Ok(Value::Unit)
            }
        }
    }

    /// Parse, desugar and evaluate `src` in `env`.
    pub fn eval_source(&mut self, src: &str, env: &Env) -> Result<Value, EvalError> {
        let members = parse_program(src)?;
        let mut sigs = env.sig_env();
        let core = desugar(&Expr::seq(members), &mut sigs)?;
        self.eval(&core, env)
    }
}
