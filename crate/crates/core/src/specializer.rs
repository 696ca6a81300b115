//! Projecting an application rule onto a known definition body.
//!
//! The body is partially evaluated against the rule's presumptions: bound
//! fragments are expanded in place, and every application-context unknown
//! that cannot be expanded is kept as a residual `T_v⟨E⟨·⟩⟩` together with
//! the presumptions it would have been reduced under, themselves
//! specialised the same way.

use std::collections::HashMap;
use std::rc::Rc;

use crate::rules::engine::{Bindings, Entry, Residual};
use crate::rules::render::one_line;
use crate::rules::{
    instantiate, Binding, Closure, Ctx, Engine, Env, Fragment, MStep, MathExpr, Program, Rule, RuleError, Step,
};
use crate::syntax::{Apply, Expr, Signature};
use crate::rules::math::THETA;

/// Captioned rule snapshots, in the order they were produced.
pub type Trace = Vec<(String, Rule)>;

pub struct Specializer {
    pub engine: Engine,
    /// Operations visible to definition bodies.
    pub env: Env,
    inlined: u64,
}

fn applications<'e>(e: &'e Expr, out: &mut Vec<&'e Apply>) {
    match e {
        Expr::Apply(a) => {
            out.push(a);
            a.args.iter().for_each(|x| applications(&x.body, out));
        }
        Expr::Seq(ms) | Expr::Block(ms) | Expr::List(ms) => ms.iter().for_each(|m| applications(m, out)),
        Expr::Infix { lhs, rhs, .. } => {
            applications(lhs, out);
            applications(rhs, out);
        }
        Expr::Def { body, app, .. } => {
            applications(body, out);
            if let Some(a) = app {
                applications(a, out);
            }
        }
        Expr::Int(_) | Expr::Str(_) => {}
    }
}

fn find_presumption<'r>(r: &'r Rule, head: &str, arity: usize) -> Option<&'r Rule> {
    r.presumptions.iter().find_map(|p| {
        if !p.memo && p.conclusion.head == head && p.conclusion.slots.len() == arity {
            Some(p)
        } else {
            find_presumption(p, head, arity)
        }
    })
}

/// Bindings giving the slots of the presumption for `a` the arguments of `a`.
fn call_bindings(r: &Rule, a: &Apply) -> Vec<Binding> {
    let Some(p) = find_presumption(r, &a.op, a.args.len()) else { return Vec::new() };
    p.conclusion
        .slots
        .iter()
        .zip(&a.args)
        .filter_map(|(s, arg)| s.unknown().map(|u| Binding::of(u, arg.body.clone())))
        .collect()
}

fn family(var: &str) -> &str {
    var.trim_end_matches(|c: char| c.is_ascii_digit())
}

/// Number the temporaries of each rule from 1, per family.
pub fn canonical(r: &Rule) -> Rule {
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut renames: HashMap<String, String> = HashMap::new();
    for s in &r.meaning {
        if let Step::Bind { var, .. } = s {
            if var != THETA && !renames.contains_key(var) {
                let f = family(var).to_string();
                let n = counts.entry(f.clone()).or_default();
                *n += 1;
                renames.insert(var.clone(), format!("{f}{n}"));
            }
        }
    }
    let hole = |m: &MathExpr| {
        let mut m = m.clone();
        for (from, to) in &renames {
            m = m.subst(&MathExpr::Hole(from.clone()), &MathExpr::Hole(format!("\u{0}{to}")));
        }
        for to in renames.values() {
            m = m.subst(&MathExpr::Hole(format!("\u{0}{to}")), &MathExpr::Hole(to.clone()));
        }
        m
    };
    let meaning = r
        .meaning
        .iter()
        .map(|s| match s {
            Step::Bind { var, program, local, subsumed } => Step::Bind {
                var: renames.get(var).cloned().unwrap_or_else(|| var.clone()),
                program: program.clone(),
                local: local.iter().map(canonical).collect(),
                subsumed: subsumed.clone(),
            },
            Step::Subst { target, replacement } => Step::Subst { target: hole(target), replacement: hole(replacement) },
        })
        .collect();
    Rule {
        conclusion: r.conclusion.clone(),
        meaning,
        presumptions: r.presumptions.iter().map(canonical).collect(),
        subsumed: r.subsumed.clone(),
        memo: r.memo,
    }
}

/// Unknowns of the given context anywhere in `r`.
fn unknowns_of(r: &Rule, ctx: Ctx) -> Vec<String> {
    r.unknowns().into_iter().filter(|u| u.ctx == ctx).map(|u| format!("{:?}⟨{}⟩", u.ctx, u.owner)).collect()
}

fn sym_targets(steps: &[Step], out: &mut Vec<String>) {
    for s in steps {
        match s {
            Step::Subst { target: MathExpr::Sym(x), .. } if !out.contains(x) => out.push(x.clone()),
            Step::Bind { subsumed, .. } => {
                for x in subsumed {
                    if !out.contains(x) {
                        out.push(x.clone());
                    }
                }
            }
            _ => {}
        }
    }
}

impl Specializer {
    pub fn new(engine: Engine, env: Env) -> Specializer {
        Specializer { engine, env, inlined: 0 }
    }

    pub fn specialize(&mut self, sig: &Signature, body: &Expr) -> Result<(Rule, Trace), RuleError> {
        let mut calls = Vec::new();
        applications(body, &mut calls);
        if calls.iter().any(|a| a.op == sig.name && a.qualifier.is_none()) {
            return Err(RuleError::NonEliminable { reference: format!("D⟨{}⟩ through a recursive {}", sig.name, sig.name) });
        }
        let (rule, d) = self.engine.rules.application_rule(sig, true);
        let mut trace = Trace::new();

        let mut first = vec![Binding::of(&d, body.clone())];
        let mut rest = Vec::new();
        for (k, a) in calls.iter().enumerate() {
            let b = call_bindings(&rule, a);
            if k == 0 && matches!(body, Expr::Apply(_)) {
                first.extend(b);
            } else if !b.is_empty() && !rest.contains(&b) {
                rest.push(b);
            }
        }
        let r1 = instantiate(&rule, &first)?;
        trace.push(("instantiate the definition body and its outermost call".into(), r1.clone()));
        if !rest.is_empty() {
            let r2 = instantiate(&r1, &rest.concat())?;
            trace.push(("instantiate presumptions at each remaining call pattern".into(), r2));
        }

        let mut b = HashMap::new();
        b.insert(d.uid, Closure::new(body.clone(), self.env.clone()));
        self.inlined = 0;
        self.engine.plain_syms = true;
        let residual = self.residualize(&rule, &Rc::new(b), false);
        self.engine.plain_syms = false;
        let residual = canonical(&residual?);
        trace.push(("combine and eliminate intermediate conclusions".into(), residual.clone()));
        let fin = canonical(&hoist(residual));
        let left = unknowns_of(&fin, Ctx::D);
        if let Some(reference) = left.into_iter().next() {
            return Err(RuleError::NonEliminable { reference });
        }
        trace.push(("fold remaining inner presumptions".into(), fin.clone()));
        Ok((fin, trace))
    }

    /// `rule` with its meaning partially evaluated under `bindings`.
    fn residualize(&mut self, rule: &Rule, bindings: &Bindings, hoisted: bool) -> Result<Rule, RuleError> {
        let call = Closure::new(Expr::Seq(Vec::new()), Env::new());
        let mut out = Vec::new();
        self.engine.expand_rule(THETA, rule, bindings, &[], &call, &mut out)?;
        let meaning = self.residual_steps(out)?;
        let mut subsumed = Vec::new();
        sym_targets(&meaning, &mut subsumed);
        let r = Rule { conclusion: rule.conclusion.clone(), meaning, presumptions: Vec::new(), subsumed, memo: false };
        Ok(if hoisted { hoist(r) } else { r })
    }

    fn residual_steps(&mut self, steps: Vec<MStep>) -> Result<Vec<Step>, RuleError> {
        let mut out = Vec::new();
        for s in steps {
            match s {
                MStep::Subst { target, replacement } => out.push(Step::Subst { target, replacement }),
                MStep::Bind { var, program: Program::Closure(c) } => out.extend(self.inline(&var, &c)?),
                MStep::Bind { var, program: Program::Unknown(r) } => out.push(self.residual_bind(var, r)?),
            }
        }
        Ok(out)
    }

    fn residual_bind(&mut self, var: String, r: Residual) -> Result<Step, RuleError> {
        let local = r.presumptions.iter().map(|p| self.residualize(p, &r.bindings, true)).collect::<Result<_, _>>()?;
        Ok(Step::Bind {
            var,
            program: Fragment::Unknown(r.unknown),
            local,
            subsumed: r.subsumed.into_iter().map(|(name, _)| name).collect(),
        })
    }

    fn inline(&mut self, var: &str, c: &Closure) -> Result<Vec<Step>, RuleError> {
        self.inlined += 1;
        if self.inlined > self.engine.fuel {
            return Err(RuleError::FuelExhausted { fuel: self.engine.fuel });
        }
        let mut out = Vec::new();
        self.engine.expand(var, c, &MathExpr::Num(0), &mut out)?;
        self.residual_steps(out)
    }

    /// Reduce `call` with `rule` as the only rule for its head.
    pub fn reduce_application(&mut self, rule: &Rule, call: &Expr) -> Result<MathExpr, RuleError> {
        let env = self.env.push(Entry::Presumption { rule: Rc::new(rule.clone()), bindings: Rc::default() }, None);
        self.engine.meaning(call, &env)
    }
}

/// A meaning that is a single residual program takes over that program's
/// presumptions.
fn hoist(mut r: Rule) -> Rule {
    let binds: Vec<usize> =
        r.meaning.iter().enumerate().filter(|(_, s)| matches!(s, Step::Bind { .. })).map(|(k, _)| k).collect();
    if let [k] = binds[..] {
        if let Step::Bind { local, .. } = &mut r.meaning[k] {
            r.presumptions.append(local);
        }
    }
    r
}

/// The final rule on one line.
pub fn rule_text(r: &Rule) -> String {
    one_line(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{desugar, parse_expression, parse_signature, SigEnv};

    const TWICE: &str = "twice OF W [F[x:int]:int][Return[f[X:int]:int]:W]:W";
    const TWICE_CBV: &str = "twice OF W [F(x:int):int][Return[f(X:int):int]:W]:W";
    const WITH: &str = "with OF T,W (X:T) [Body(__:T):W] : W";

    fn setup() -> (SigEnv, Specializer) {
        let mut sigs = SigEnv::new();
        for s in [WITH, "c"] {
            sigs.bind_op(parse_signature(s).unwrap());
        }
        let mut engine = Engine::new();
        let with = parse_signature(WITH).unwrap();
        let mut scope = sigs.clone();
        scope.bind_params(&with);
        let body = desugar(&parse_expression("Body{X}").unwrap(), &mut scope).unwrap();
        let env = engine.define(&Env::new(), &with, &body);
        (sigs, Specializer::new(engine, env))
    }

    fn run(sig: &str, body: &str) -> (SigEnv, Specializer, Result<(Rule, Trace), RuleError>) {
        let (mut sigs, mut sp) = setup();
        let sig = parse_signature(sig).unwrap();
        let mut scope = sigs.clone();
        scope.bind_op(sig.clone());
        scope.bind_params(&sig);
        let body = desugar(&parse_expression(body).unwrap(), &mut scope).unwrap();
        let r = sp.specialize(&sig, &body);
        sigs.bind_op(sig);
        (sigs, sp, r)
    }

    fn reduce(sigs: &mut SigEnv, sp: &mut Specializer, r: &Rule, call: &str) -> MathExpr {
        let call = desugar(&parse_expression(call).unwrap(), sigs).unwrap();
        sp.reduce_application(r, &call).unwrap()
    }

    #[test]
    fn twice_final_rule() {
        let (mut sigs, mut sp, r) = run(TWICE, "Return{F{F{X}}}");
        let (rule, trace) = r.unwrap();
        assert_eq!(
            rule_text(&rule),
            "twice{E⟨F⟩}{E⟨Return⟩} ⟶ T_θ⟨E⟨Return⟩⟩ ⊣ (f{E⟨X⟩} ⟶ T_θ⟨E⟨F⟩⟩ ⊣ (x ⟶ T_θ⟨E⟨F⟩⟩ ⊣ (x ⟶ T_θ⟨E⟨X⟩⟩)))"
        );
        assert!(trace.first().unwrap().1.unknowns().iter().any(|u| u.ctx == Ctx::D));
        assert!(rule.unknowns().iter().all(|u| u.ctx == Ctx::E));
        assert_eq!(reduce(&mut sigs, &mut sp, &rule, "twice{x*x}{f{c}}").to_string(), "((c*c)*(c*c))");
        let m = reduce(&mut sigs, &mut sp, &rule, "twice{x*x}{f{2}}");
        assert_eq!(m.to_string(), "((2*2)*(2*2))");
        assert_eq!(m.evaluate::<i64>(), Ok(16));
    }

    #[test]
    fn twice_by_value() {
        let (mut sigs, mut sp, r) = run(TWICE_CBV, "Return{with(X) u; F{F{u}}}");
        let (rule, _) = r.unwrap();
        assert_eq!(reduce(&mut sigs, &mut sp, &rule, "twice{x*x}{f{c}}").to_string(), "((c*c)*(c*c))");
        assert_eq!(sp.engine.bind_counts.get("c").copied(), Some(1));
        assert_eq!(reduce(&mut sigs, &mut sp, &rule, "twice{x*x}{f{5}}").evaluate::<i64>(), Ok(625));
    }

    #[test]
    fn constant_body() {
        let (_, _, r) = run("f OF T [A:int]:int", "7");
        let (rule, _) = r.unwrap();
        assert_eq!(rule_text(&rule), "f{E⟨A⟩} ⟶ [7/θ]");
    }

    #[test]
    fn r_agrees_with_direct_reduction() {
        let (mut sigs, mut sp, r) = run("r OF T [D[x:int]:int] [A[f[X:int]:int]:T]: T", "A{D{X*2}}");
        let (rule, _) = r.unwrap();
        assert_eq!(reduce(&mut sigs, &mut sp, &rule, "r{x*x}{f{3}}").to_string(), "((3*2)*(3*2))");
    }

    #[test]
    fn pass_through() {
        let (mut sigs, mut sp, r) = run("id OF W [Return[f[X:int]:int]:W]:W", "Return{X}");
        let (rule, _) = r.unwrap();
        assert_eq!(reduce(&mut sigs, &mut sp, &rule, "id{f{5}}").evaluate::<i64>(), Ok(5));
    }

    #[test]
    fn recursion_is_rejected() {
        let (_, _, r) = run("rec_op OF T [A:int]:int", "A + rec_op{A}");
        assert!(matches!(r, Err(RuleError::NonEliminable { .. })));
    }
}
