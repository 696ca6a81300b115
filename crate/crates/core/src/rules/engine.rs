//! Equational reasoning over transformer chains.
//!
//! A chain is reduced right to left: a trailing substitution is applied to
//! the terminal expression, a trailing `T_v⟨P⟩` is replaced by the steps an
//! axiom or a matching presumption gives for `P`.

use std::collections::HashMap;
use std::rc::Rc;

use super::math::{bin, MathExpr, OPERATORS, THETA};
use super::render::chain_text;
use super::rule::{Chain, Fragment, Rule, RuleFactory, Step, Unknown};
use super::RuleError;
use crate::syntax::{print_expr, Apply, Arg, Expr, Signature};

pub const DEFAULT_FUEL: u64 = 100_000;

/// A program fragment with the presumptions it may use.
#[derive(Debug, Clone)]
pub struct Closure {
    pub expr: Rc<Expr>,
    pub env: Env,
    /// Level name the fragment was passed under.
    pub label: Option<String>,
}

impl Closure {
    pub fn new(expr: Expr, env: Env) -> Closure {
        Closure { expr: Rc::new(expr), env, label: None }
    }
}

pub type Bindings = Rc<HashMap<u32, Closure>>;

#[derive(Debug, Clone)]
pub enum Entry {
    Presumption { rule: Rc<Rule>, bindings: Bindings },
    /// A by-value parameter, standing for the mathematical name `sym`.
    Subsumed { name: String, sym: String },
    /// A program variable introduced by `var`.
    Var { name: String, sym: String },
}

#[derive(Debug)]
struct Node {
    entry: Entry,
    level: Option<String>,
    next: Env,
}

/// Persistent environment; later entries shadow earlier ones.
#[derive(Debug, Clone, Default)]
pub struct Env(Option<Rc<Node>>);

impl Env {
    pub fn new() -> Env {
        Env(None)
    }

    pub fn push(&self, entry: Entry, level: Option<String>) -> Env {
        Env(Some(Rc::new(Node { entry, level, next: self.clone() })))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Entry, Option<&str>)> {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let n = cur?;
            cur = n.next.0.as_deref();
            Some((&n.entry, n.level.as_deref()))
        })
    }

    fn sym_in_use(&self, sym: &str) -> bool {
        self.iter().any(|(e, _)| matches!(e, Entry::Subsumed { sym: s, .. } | Entry::Var { sym: s, .. } if s == sym))
    }
}

/// What a `Bind` step is about to transform.
#[derive(Debug, Clone)]
pub enum Program {
    Closure(Closure),
    /// An unknown with no value: reduction gets stuck on it.
    Unknown(Residual),
}

/// An unbound unknown with what it would have been reduced under.
#[derive(Debug, Clone)]
pub struct Residual {
    pub unknown: Unknown,
    pub presumptions: Vec<Rule>,
    pub bindings: Bindings,
    /// `(name, sym)` pairs for by-value names it may read.
    pub subsumed: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub enum MStep {
    Bind { var: String, program: Program },
    Subst { target: MathExpr, replacement: MathExpr },
}

/// A chain under reduction.
#[derive(Debug, Clone)]
pub struct MChain {
    pub steps: Vec<MStep>,
    pub terminal: MathExpr,
}

impl MChain {
    /// `T_θ⟨e⟩ θ`
    pub fn of(closure: Closure) -> MChain {
        MChain {
            steps: vec![MStep::Bind { var: THETA.into(), program: Program::Closure(closure) }],
            terminal: MathExpr::Hole(THETA.into()),
        }
    }

    /// As a displayable chain over fragments.
    pub fn snapshot(&self) -> Chain {
        Chain {
            steps: self
                .steps
                .iter()
                .map(|s| match s {
                    MStep::Bind { var, program: Program::Closure(c) } => {
                        Step::bind(var, Fragment::Concrete((*c.expr).clone()))
                    }
                    MStep::Bind { var, program: Program::Unknown(r) } => {
                        Step::bind(var, Fragment::Unknown(r.unknown.clone()))
                    }
                    MStep::Subst { target, replacement } => {
                        Step::Subst { target: target.clone(), replacement: replacement.clone() }
                    }
                })
                .collect(),
            terminal: self.terminal.clone(),
        }
    }
}

/// The reducer, holding fresh-name counters and the step budget.
pub struct Engine {
    pub fuel: u64,
    used: u64,
    counters: HashMap<&'static str, u64>,
    seed: u64,
    pub rules: RuleFactory,
    /// When set, every intermediate chain is recorded here.
    pub trace: Option<Vec<String>>,
    /// How often each program text was expanded by a `Bind`.
    pub bind_counts: HashMap<String, usize>,
    /// Keep by-value names as written instead of renaming them apart.
    pub(crate) plain_syms: bool,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

fn if_parts(e: &Expr) -> Option<(&Expr, &Expr, &Expr)> {
    match e {
        Expr::Apply(a) if a.op == "if" && a.qualifier.is_none() && a.args.len() == 3 => {
            Some((&a.args[0].body, &a.args[1].body, &a.args[2].body))
        }
        _ => None,
    }
}

/// `result(L.__ - 1)` with `L.__` the induction variable.
fn is_recursive_call(e: &Expr, level: &Option<String>) -> bool {
    let Expr::Apply(a) = e else { return false };
    if a.op != "result" || a.args.len() != 1 {
        return false;
    }
    matches!(&a.args[0].body, Expr::Infix { op, lhs, rhs, .. }
        if op == "-" && is_index(lhs, level) && **rhs == Expr::Int(1))
}

fn is_index(e: &Expr, level: &Option<String>) -> bool {
    matches!(e, Expr::Apply(a) if a.op == "__" && a.args.is_empty() && a.qualifier == *level)
}

/// `((x + a) - b)` → `(a - b)`: drop the accumulator at the left end of a
/// sum.
fn strip_accumulator(m: &MathExpr, x: &str) -> Option<MathExpr> {
    match m {
        MathExpr::BinOp(op, l, r) if op == "+" && matches!(&**l, MathExpr::Sym(s) if s == x) => Some((**r).clone()),
        MathExpr::BinOp(op, l, r) if op == "+" || op == "-" => Some(bin(op, strip_accumulator(l, x)?, (**r).clone())),
        _ => None,
    }
}

fn var_read(e: &Expr) -> Option<&str> {
    match e {
        Expr::Apply(a) if a.op == "_" && a.args.is_empty() => a.qualifier.as_deref(),
        _ => None,
    }
}

impl Engine {
    pub fn new() -> Engine {
        Engine::with_seed(0)
    }

    /// Fresh names start counting at `seed + 1`.
    pub fn with_seed(seed: u64) -> Engine {
        Engine {
            fuel: DEFAULT_FUEL,
            used: 0,
            counters: HashMap::new(),
            seed,
            rules: RuleFactory::new(),
            trace: None,
            bind_counts: HashMap::new(),
            plain_syms: false,
        }
    }

    pub fn fresh(&mut self, family: &'static str) -> String {
        let n = self.counters.entry(family).or_insert(self.seed);
        *n += 1;
        format!("{family}{n}")
    }

    fn fresh_sym(&mut self, name: &str, env: &Env) -> String {
        if self.plain_syms || !env.sym_in_use(name) {
            return name.to_string();
        }
        loop {
            let n = self.counters.entry("sym").or_insert(self.seed);
            *n += 1;
            let s = format!("{name}{n}");
            if !env.sym_in_use(&s) {
                return s;
            }
        }
    }

    /// Environment holding application rules for top-level definitions.
    pub fn define(&mut self, env: &Env, sig: &Signature, body: &Expr) -> Env {
        let (rule, d) = self.rules.application_rule(sig, true);
        let mut bindings = HashMap::new();
        bindings.insert(d.uid, Closure::new(body.clone(), env.clone()));
        env.push(Entry::Presumption { rule: Rc::new(rule), bindings: Rc::new(bindings) }, None)
    }

    /// Reduce `T_θ⟨e⟩ θ` to a mathematical expression.
    pub fn meaning(&mut self, e: &Expr, env: &Env) -> Result<MathExpr, RuleError> {
        self.run(MChain::of(Closure::new(e.clone(), env.clone())))
    }

    /// Reduce until no steps remain.
    pub fn run(&mut self, mut chain: MChain) -> Result<MathExpr, RuleError> {
        while !chain.steps.is_empty() {
            if let Some(t) = &mut self.trace {
                t.push(chain_text(&chain.snapshot()));
            }
            self.step(&mut chain)?;
        }
        if let Some(t) = &mut self.trace {
            t.push(chain.terminal.to_string());
        }
        Ok(chain.terminal)
    }

    /// One rewrite at the right end of the chain.
    pub fn step(&mut self, chain: &mut MChain) -> Result<(), RuleError> {
        self.used += 1;
        if self.used > self.fuel {
            return Err(RuleError::FuelExhausted { fuel: self.fuel });
        }
        match chain.steps.pop() {
            None => Ok(()),
            Some(MStep::Subst { target, replacement }) => {
                chain.terminal = chain.terminal.subst(&target, &replacement);
                Ok(())
            }
            Some(MStep::Bind { var, program }) => match program {
                Program::Unknown(r) => {
                    Err(RuleError::Stuck { program: format!("{:?}⟨{}⟩", r.unknown.ctx, r.unknown.owner) })
                }
                Program::Closure(c) => {
                    *self.bind_counts.entry(print_expr(&c.expr)).or_default() += 1;
                    let mut out = Vec::new();
                    self.expand(&var, &c, &chain.terminal, &mut out)?;
                    chain.steps.extend(out);
                    Ok(())
                }
            },
        }
    }

    /// Apply one axiom to the trailing `Bind`; rules are not consulted.
    pub fn apply_axiom(&mut self, chain: &mut MChain) -> Result<(), RuleError> {
        let Some(MStep::Bind { var, program: Program::Closure(c) }) = chain.steps.last().cloned() else {
            return Err(RuleError::NoAxiomApplies { program: "no trailing program".into() });
        };
        let mut out = Vec::new();
        if !self.axiom(&var, &c, &chain.terminal, &mut out)? {
            return Err(RuleError::NoAxiomApplies { program: print_expr(&c.expr) });
        }
        chain.steps.pop();
        chain.steps.extend(out);
        Ok(())
    }

    fn sub(&mut self, var: &str, expr: &Expr, c: &Closure) -> MStep {
        MStep::Bind {
            var: var.to_string(),
            program: Program::Closure(Closure { expr: Rc::new(expr.clone()), env: c.env.clone(), label: None }),
        }
    }

    fn temp(&mut self, var: &str) -> String {
        if var == THETA {
            self.fresh("τ")
        } else {
            self.fresh("μ")
        }
    }

    /// Constant, subsumed name, sequence, infix, annihilate. Returns false
    /// when none applies.
    fn axiom(&mut self, var: &str, c: &Closure, terminal: &MathExpr, out: &mut Vec<MStep>) -> Result<bool, RuleError> {
        let hole = MathExpr::Hole(var.to_string());
        match &*c.expr {
            Expr::Int(v) => out.push(MStep::Subst { target: hole, replacement: MathExpr::Num(*v) }),
            Expr::Seq(ms) if ms.is_empty() => {
                if terminal.occurs(&hole) {
                    return Err(RuleError::AnnihilateViolation { var: var.to_string() });
                }
            }
            Expr::Seq(ms) => {
                let dummy = self.temp(var);
                let first = self.sub(&dummy, &ms[0], c);
                let rest = self.sub(var, &Expr::seq(ms[1..].to_vec()), c);
                out.push(first);
                out.push(rest);
            }
            Expr::Infix { op, owner: None, lhs, rhs, .. } if OPERATORS.contains(&op.as_str()) => {
                let t1 = self.temp(var);
                let t2 = self.temp(var);
                let l = self.sub(&t1, lhs, c);
                let r = self.sub(&t2, rhs, c);
                out.push(l);
                out.push(r);
                out.push(MStep::Subst { target: hole, replacement: bin(op, MathExpr::Hole(t1), MathExpr::Hole(t2)) });
            }
            Expr::Apply(a) if a.args.is_empty() && self.lookup(&c.env, a).is_none() && a.qualifier.is_none() => {
                out.push(MStep::Subst { target: hole, replacement: MathExpr::Sym(a.op.clone()) });
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn lookup<'e>(&self, env: &'e Env, a: &Apply) -> Option<&'e Entry> {
        for (entry, level) in env.iter() {
            if let Some(q) = &a.qualifier {
                if let Entry::Var { name, .. } = entry {
                    if name == q && (a.op == "_" || a.op == "__") {
                        return Some(entry);
                    }
                }
                if level != Some(q.as_str()) {
                    continue;
                }
            }
            match entry {
                Entry::Presumption { rule, .. } => {
                    let p = &rule.conclusion;
                    if p.head == a.op
                        && p.slots.len() == a.args.len()
                        && p.slots.iter().zip(&a.args).all(|(s, arg)| match s {
                            Fragment::Concrete(e) => *e == arg.body,
                            Fragment::Unknown(_) => true,
                        })
                    {
                        return Some(entry);
                    }
                }
                Entry::Subsumed { name, .. } if *name == a.op && a.args.is_empty() => return Some(entry),
                _ => {}
            }
        }
        None
    }

    fn var_sym(&self, env: &Env, name: &str) -> Option<String> {
        env.iter().find_map(|(e, _)| match e {
            Entry::Var { name: n, sym } if n == name => Some(sym.clone()),
            _ => None,
        })
    }

    pub(crate) fn expand(&mut self, var: &str, c: &Closure, terminal: &MathExpr, out: &mut Vec<MStep>) -> Result<(), RuleError> {
        let hole = MathExpr::Hole(var.to_string());
        if let Expr::Apply(a) = &*c.expr {
            match self.lookup(&c.env, a).cloned() {
                Some(Entry::Presumption { rule, bindings }) => return self.expand_rule(var, &rule, &bindings, &a.args, c, out),
                Some(Entry::Subsumed { sym, .. }) | Some(Entry::Var { sym, .. }) => {
                    out.push(MStep::Subst { target: hole, replacement: MathExpr::Sym(sym) });
                    return Ok(());
                }
                None => {}
            }
            if a.qualifier.is_none() {
                if let Some(done) = self.intrinsic(var, a, c, out)? {
                    return Ok(done);
                }
            }
        }
        match &*c.expr {
            Expr::Def { sig, body, app: Some(app), .. } => {
                let env = self.define(&c.env, sig, body);
                out.push(MStep::Bind {
                    var: var.to_string(),
                    program: Program::Closure(Closure { expr: Rc::new((**app).clone()), env, label: None }),
                });
                Ok(())
            }
            Expr::Infix { op, owner: Some(x), rhs, .. } if op == ":=" => {
                let Some(sym) = self.var_sym(&c.env, x) else {
                    return Err(RuleError::Stuck { program: print_expr(&c.expr) });
                };
                let r = self.sub(var, rhs, c);
                out.push(r);
                out.push(MStep::Subst { target: MathExpr::Sym(sym), replacement: hole });
                Ok(())
            }
            _ => {
                if self.axiom(var, c, terminal, out)? {
                    Ok(())
                } else {
                    Err(RuleError::Stuck { program: print_expr(&c.expr) })
                }
            }
        }
    }

    pub(crate) fn expand_rule(
        &mut self,
        var: &str,
        rule: &Rule,
        bindings: &Bindings,
        args: &[Arg],
        call: &Closure,
        out: &mut Vec<MStep>,
    ) -> Result<(), RuleError> {
        let mut nb = (**bindings).clone();
        for (slot, arg) in rule.conclusion.slots.iter().zip(args) {
            if let Fragment::Unknown(u) = slot {
                nb.insert(
                    u.uid,
                    Closure { expr: Rc::new(arg.body.clone()), env: call.env.clone(), label: arg.label.clone() },
                );
            }
        }
        let nb = Rc::new(nb);
        let mut renames: HashMap<String, String> = HashMap::new();
        renames.insert(THETA.to_string(), var.to_string());
        let closure_of = |f: &Fragment| -> Option<Closure> {
            match f {
                Fragment::Unknown(u) => nb.get(&u.uid).cloned(),
                Fragment::Concrete(e) => Some(Closure::new(e.clone(), call.env.clone())),
            }
        };
        let main_env = rule
            .meaning
            .iter()
            .rev()
            .find_map(|s| match s {
                Step::Bind { var, program, .. } if var == THETA => closure_of(program).map(|c| c.env),
                _ => None,
            })
            .unwrap_or_default();
        let mut syms = HashMap::new();
        for p in &rule.subsumed {
            let s = self.fresh_sym(p, &main_env);
            syms.insert(p.clone(), s);
        }
        for s in &rule.meaning {
            match s {
                Step::Bind { var: v, program, local, subsumed } => {
                    let new_var = if v == THETA {
                        var.to_string()
                    } else {
                        let fresh = self.fresh("η");
                        renames.insert(v.clone(), fresh.clone());
                        fresh
                    };
                    let subsumed: Vec<(String, String)> = subsumed
                        .iter()
                        .map(|p| (p.clone(), syms.get(p).cloned().unwrap_or_else(|| p.clone())))
                        .collect();
                    let mut presumptions: Vec<Rule> = if v == THETA { rule.presumptions.clone() } else { Vec::new() };
                    presumptions.extend(local.iter().cloned());
                    let program = match (closure_of(program), program) {
                        (Some(mut c), _) => {
                            let level = c.label.clone();
                            for (name, sym) in &subsumed {
                                c.env = c.env.push(Entry::Subsumed { name: name.clone(), sym: sym.clone() }, level.clone());
                            }
                            for p in presumptions {
                                c.env = c.env.push(
                                    Entry::Presumption { rule: Rc::new(p), bindings: nb.clone() },
                                    level.clone(),
                                );
                            }
                            Program::Closure(c)
                        }
                        (None, Fragment::Unknown(u)) => Program::Unknown(Residual {
                            unknown: u.clone(),
                            presumptions,
                            bindings: nb.clone(),
                            subsumed,
                        }),
                        (None, Fragment::Concrete(_)) => unreachable!(),
                    };
                    out.push(MStep::Bind { var: new_var, program });
                }
                Step::Subst { target, replacement } => {
                    let rename = |m: &MathExpr| -> MathExpr {
                        match m {
                            MathExpr::Hole(h) => MathExpr::Hole(renames.get(h).cloned().unwrap_or_else(|| h.clone())),
                            MathExpr::Sym(s) => MathExpr::Sym(syms.get(s).cloned().unwrap_or_else(|| s.clone())),
                            other => other.clone(),
                        }
                    };
                    let mut rep = replacement.clone();
                    for (from, to) in &renames {
                        rep = rep.subst(&MathExpr::Hole(from.clone()), &MathExpr::Hole(to.clone()));
                    }
                    out.push(MStep::Subst { target: rename(target), replacement: rep });
                }
            }
        }
        Ok(())
    }

    /// Operations reduced without a presumption: `program`, `if`, `var`
    /// and the linear `induction` forms.
    fn intrinsic(&mut self, var: &str, a: &Apply, c: &Closure, out: &mut Vec<MStep>) -> Result<Option<()>, RuleError> {
        let hole = MathExpr::Hole(var.to_string());
        let arg = |k: usize| Closure { expr: Rc::new(a.args[k].body.clone()), env: c.env.clone(), label: a.args[k].label.clone() };
        match (a.op.as_str(), a.args.len()) {
            ("program", 1) => {
                out.push(MStep::Bind { var: var.to_string(), program: Program::Closure(arg(0)) });
            }
            ("if", 3) => {
                let ts: Vec<String> = (0..3).map(|_| self.temp(var)).collect();
                for (k, t) in ts.iter().enumerate() {
                    out.push(MStep::Bind { var: t.clone(), program: Program::Closure(arg(k)) });
                }
                let h = |k: usize| Box::new(MathExpr::Hole(ts[k].clone()));
                out.push(MStep::Subst { target: hole, replacement: MathExpr::Cond(h(0), h(1), h(2)) });
            }
            ("var", 1) => {
                let name = a.args[0].label.clone().unwrap_or_else(|| "__".into());
                let sym = self.fresh_sym(&name, &c.env);
                let mut body = arg(0);
                body.env = body.env.push(Entry::Var { name, sym }, None);
                out.push(MStep::Bind { var: var.to_string(), program: Program::Closure(body) });
            }
            ("induction", 2) => return self.induction(var, a, c, out).map(Some),
            _ => return Ok(None),
        }
        Ok(Some(()))
    }

    /// Reduce a side fragment to its meaning in a nested chain.
    fn side_meaning(&mut self, expr: &Expr, env: Env) -> Result<MathExpr, RuleError> {
        let h = self.fresh("μ");
        let chain = MChain {
            steps: vec![MStep::Bind { var: h.clone(), program: Program::Closure(Closure::new(expr.clone(), env)) }],
            terminal: MathExpr::Hole(h),
        };
        let saved = self.trace.take();
        let r = self.run(chain);
        self.trace = saved;
        r
    }

    fn induction(&mut self, var: &str, a: &Apply, c: &Closure, out: &mut Vec<MStep>) -> Result<(), RuleError> {
        let stuck = || RuleError::Stuck { program: print_expr(&Expr::Apply(a.clone())) };
        let level = a.args[1].label.clone();
        let index = level.clone().unwrap_or_else(|| "i".into());
        let (cond, then, els) = if_parts(&a.args[1].body).ok_or_else(stuck)?;
        let base_case = matches!(cond, Expr::Infix { op, lhs, rhs, .. } if op == "=" && is_index(lhs, &level) && **rhs == Expr::Int(0));
        if !base_case {
            return Err(stuck());
        }
        let sym = self.fresh_sym(&index, &c.env);
        let inner_env = c.env.push(Entry::Subsumed { name: "__".into(), sym: sym.clone() }, level.clone());
        let n = self.temp(var);
        let sum = |body: MathExpr| MathExpr::Sum {
            index: sym.clone(),
            lo: Box::new(MathExpr::Num(1)),
            hi: Box::new(MathExpr::Hole(n.clone())),
            body: Box::new(body),
        };
        let hole = MathExpr::Hole(var.to_string());
        // if(i=0, B, S + result(i-1))
        if let Expr::Infix { op, lhs, rhs, .. } = els {
            if op == "+" {
                let step = if is_recursive_call(rhs, &level) {
                    Some(lhs)
                } else if is_recursive_call(lhs, &level) {
                    Some(rhs)
                } else {
                    None
                };
                if let Some(step) = step {
                    let s = self.side_meaning(step, inner_env)?;
                    let b = self.side_meaning(then, c.env.clone())?;
                    let total = if b == MathExpr::Num(0) { sum(s) } else { bin("+", b, sum(s)) };
                    out.push(MStep::Bind { var: n.clone(), program: Program::Closure(Closure::new(a.args[0].body.clone(), c.env.clone())) });
                    out.push(MStep::Subst { target: hole, replacement: total });
                    return Ok(());
                }
            }
        }
        // if(i=0, x){result(i-1); x:=x+S}
        if let (Some(x), Expr::Seq(ms)) = (var_read(then), els) {
            if let [first, Expr::Infix { op, owner: Some(o), rhs, .. }] = ms.as_slice() {
                if op == ":=" && o == x && is_recursive_call(first, &level) {
                    let xs = self.var_sym(&c.env, x).ok_or_else(stuck)?;
                    let m = self.side_meaning(rhs, inner_env)?;
                    if let Some(s) = strip_accumulator(&m, &xs) {
                        if !s.occurs(&MathExpr::Sym(xs.clone())) {
                            out.push(MStep::Bind {
                                var: n.clone(),
                                program: Program::Closure(Closure::new(a.args[0].body.clone(), c.env.clone())),
                            });
                            out.push(MStep::Subst { target: MathExpr::Sym(xs.clone()), replacement: bin("+", MathExpr::Sym(xs.clone()), sum(s)) });
                            out.push(MStep::Subst { target: hole, replacement: MathExpr::Sym(xs) });
                            return Ok(());
                        }
                    }
                }
            }
        }
        Err(stuck())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{desugar, parse_expression, parse_signature, SigEnv};

    const SIGS: [&str; 5] = [
        "program OF T [Body:T]:T",
        "with OF T,W (X:T) [Body(__:T):W] : W",
        "var OF w, rvalue [Scope OF lvalue (__:lvalue) [_:rvalue] [:=(lvalue,rvalue) : rvalue]:w]:w",
        "if OF T (C:bool) [Then:T] [Else:T] : T",
        "induction OF Problem, Result [Initial:Problem] [Break_down[__:Problem] [result[Sub:Problem]:Result]:Result]:Result",
    ];

    fn setup() -> (SigEnv, Engine, Env) {
        let mut sigs = SigEnv::new();
        for s in SIGS.iter().chain(&["c", "n"]) {
            sigs.bind_op(parse_signature(s).unwrap());
        }
        let mut engine = Engine::new();
        let with = parse_signature(SIGS[1]).unwrap();
        let mut scope = sigs.clone();
        scope.bind_params(&with);
        let body = desugar(&parse_expression("Body{X}").unwrap(), &mut scope).unwrap();
        let env = engine.define(&Env::new(), &with, &body);
        (sigs, engine, env)
    }

    fn meaning(src: &str) -> Result<MathExpr, RuleError> {
        let (mut sigs, mut engine, env) = setup();
        let core = desugar(&parse_expression(src).unwrap(), &mut sigs).unwrap();
        engine.meaning(&core, &env)
    }

    #[test]
    fn def_r_gives_36() {
        let m = meaning("DEF r OF T [D[x:int]:int] [A[f[X:int]:int]:T]: T {A{D{X*2}}} {r{x*x}{f{3}}}").unwrap();
        assert_eq!(m.to_string(), "((3*2)*(3*2))");
        assert_eq!(m.evaluate::<i64>(), Ok(36));
    }

    #[test]
    fn twice_by_name_and_by_value() {
        let cbn = "DEF twice OF W [F[x:int]:int][Return[f[X:int]:int]:W]:W {Return{F{F{X}}}} {twice{x*x}{f{c}}}";
        let cbv = "DEF twice OF W [F(x:int):int][Return[f(X:int):int]:W]:W {Return{with(X) u; F{F{u}}}} {twice{x*x}{f{c}}}";
        for src in [cbn, cbv] {
            assert_eq!(meaning(src).unwrap().to_string(), "((c*c)*(c*c))");
        }
        let count = |src: &str| {
            let (mut sigs, mut engine, env) = setup();
            let core = desugar(&parse_expression(src).unwrap(), &mut sigs).unwrap();
            engine.meaning(&core, &env).unwrap();
            engine.bind_counts.get("c").copied().unwrap_or(0)
        };
        assert_eq!(count(cbn), 4);
        assert_eq!(count(cbv), 1);
    }

    #[test]
    fn nested_with_keeps_levels_apart() {
        assert_eq!(meaning("with(1) u:{ with(2) w:{ u - w } }").unwrap().evaluate::<i64>(), Ok(-1));
    }

    #[test]
    fn constant_axiom() {
        let mut e = Engine::new();
        let r = bin("+", MathExpr::Hole(THETA.into()), MathExpr::Num(1));
        let mut chain = MChain { steps: vec![], terminal: r };
        chain.steps.push(MStep::Bind { var: THETA.into(), program: Program::Closure(Closure::new(Expr::Int(3), Env::new())) });
        e.apply_axiom(&mut chain).unwrap();
        e.step(&mut chain).unwrap();
        assert_eq!(chain.terminal.to_string(), "(3+1)");
    }

    #[test]
    fn infix_axiom_introduces_temporaries() {
        let mut e = Engine::new();
        let x2 = parse_expression("X*2").unwrap();
        let mut chain = MChain::of(Closure::new(x2, Env::new()));
        e.apply_axiom(&mut chain).unwrap();
        assert_eq!(chain_text(&chain.snapshot()), "T_τ1⟨X⟩T_τ2⟨2⟩[(τ1*τ2)/θ]");
    }

    #[test]
    fn annihilate() {
        let mut e = Engine::new();
        let r = bin("+", MathExpr::Hole(THETA.into()), MathExpr::Num(1));
        let mut chain = MChain { steps: vec![], terminal: r };
        chain.steps.push(MStep::Bind { var: THETA.into(), program: Program::Closure(Closure::new(Expr::Seq(vec![]), Env::new())) });
        assert!(matches!(e.run(chain), Err(RuleError::AnnihilateViolation { .. })));
        let mut chain = MChain { steps: vec![], terminal: MathExpr::Num(4) };
        chain.steps.push(MStep::Bind { var: THETA.into(), program: Program::Closure(Closure::new(Expr::Seq(vec![]), Env::new())) });
        assert_eq!(e.run(chain), Ok(MathExpr::Num(4)));
    }

    #[test]
    fn assignment_eliminates_variable() {
        let m = meaning("{var x; x:=3; x:=x+1; x*x}").unwrap();
        assert_eq!(m.evaluate::<i64>(), Ok(16));
    }

    #[test]
    fn induction_sums() {
        let m = meaning("induction(n) i:{if(i=0,0,(2*i-1)+result(i-1))}").unwrap();
        assert_eq!(m.to_string(), "Σ_{i=1}^{n}((2*i)-1)");
        let five = m.subst(&MathExpr::Sym("n".into()), &MathExpr::Num(5));
        assert_eq!(five.evaluate::<i64>(), Ok(25));
        let m = meaning("{var x; x:=0; induction(6) i:{if(i=0,x){result(i-1); x:=x+2*i-1}}}").unwrap();
        assert_eq!(m.evaluate::<i64>(), Ok(36));
    }

    #[test]
    fn unknown_operation_is_stuck() {
        let mut sigs = SigEnv::new();
        sigs.bind_op(parse_signature("g[A:int]:int").unwrap());
        let core = desugar(&parse_expression("g{1}").unwrap(), &mut sigs).unwrap();
        assert!(matches!(Engine::new().meaning(&core, &Env::new()), Err(RuleError::Stuck { .. })));
    }
}
