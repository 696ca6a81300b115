//! Inference rules, transformer chains and DEF-scheme generation.

use std::collections::HashMap;

use super::math::{MathExpr, THETA};
use super::RuleError;
use crate::syntax::{Expr, ParamSpec, Signature};

/// Which side of a definition a fragment comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctx {
    /// Defining context, `D⟨·⟩`.
    D,
    /// Application context, `E⟨·⟩`.
    E,
}

impl Ctx {
    pub fn other(self) -> Ctx {
        match self {
            Ctx::D => Ctx::E,
            Ctx::E => Ctx::D,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Unknown {
    pub ctx: Ctx,
    pub owner: String,
    pub uid: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fragment {
    Unknown(Unknown),
    Concrete(Expr),
}

impl Fragment {
    pub fn unknown(&self) -> Option<&Unknown> {
        match self {
            Fragment::Unknown(u) => Some(u),
            Fragment::Concrete(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// `T_var⟨program⟩`, with presumptions local to this program and the
    /// by-value names it reads as plain mathematical names.
    Bind { var: String, program: Fragment, local: Vec<Rule>, subsumed: Vec<String> },
    /// `[replacement/target]`
    Subst { target: MathExpr, replacement: MathExpr },
}

impl Step {
    pub fn bind(var: &str, program: Fragment) -> Step {
        Step::Bind { var: var.to_string(), program, local: Vec::new(), subsumed: Vec::new() }
    }

    pub fn bind_theta(program: Fragment) -> Step {
        Step::bind(THETA, program)
    }
}

/// Steps applied right to left to `terminal`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub steps: Vec<Step>,
    pub terminal: MathExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub head: String,
    pub slots: Vec<Fragment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub conclusion: Pattern,
    /// Open chain; its continuation is the surrounding expression over θ.
    pub meaning: Vec<Step>,
    pub presumptions: Vec<Rule>,
    /// Mathematical names renamed apart on every use of the rule.
    pub subsumed: Vec<String>,
    /// Rendered as an ellipsis.
    pub memo: bool,
}

impl Rule {
    pub fn new(conclusion: Pattern, meaning: Vec<Step>) -> Rule {
        Rule { conclusion, meaning, presumptions: Vec::new(), subsumed: Vec::new(), memo: false }
    }

    /// Unknowns bound by this rule's own conclusion pattern.
    pub fn pattern_unknowns(&self) -> Vec<&Unknown> {
        self.conclusion.slots.iter().filter_map(Fragment::unknown).collect()
    }

    /// All unknowns anywhere in the rule.
    pub fn unknowns(&self) -> Vec<Unknown> {
        let mut out = Vec::new();
        self.collect_unknowns(&mut out);
        out
    }

    fn collect_unknowns(&self, out: &mut Vec<Unknown>) {
        let mut push = |f: &Fragment| {
            if let Fragment::Unknown(u) = f {
                if !out.contains(u) {
                    out.push(u.clone());
                }
            }
        };
        self.conclusion.slots.iter().for_each(&mut push);
        for s in &self.meaning {
            if let Step::Bind { program, .. } = s {
                push(program);
            }
        }
        for s in &self.meaning {
            if let Step::Bind { local, .. } = s {
                local.iter().for_each(|r| r.collect_unknowns(out));
            }
        }
        self.presumptions.iter().for_each(|r| r.collect_unknowns(out));
    }

    /// Nesting depth of presumptions (a rule without any has depth 0).
    pub fn depth(&self) -> usize {
        self.presumptions.iter().map(|p| p.depth() + 1).max().unwrap_or(0)
    }

    fn replace(&mut self, key: &Unknown, with: &Expr) {
        let rep = |f: &mut Fragment| {
            if matches!(f, Fragment::Unknown(u) if u == key) {
                *f = Fragment::Concrete(with.clone());
            }
        };
        self.conclusion.slots.iter_mut().for_each(rep);
        for s in &mut self.meaning {
            if let Step::Bind { program, local, .. } = s {
                rep(program);
                local.iter_mut().for_each(|r| r.replace(key, with));
            }
        }
        self.presumptions.iter_mut().for_each(|r| r.replace(key, with));
    }
}

/// A value for an unknown, tagged with the context it was taken from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub key: Unknown,
    pub ctx: Ctx,
    pub value: Expr,
}

impl Binding {
    /// A binding whose context matches the key.
    pub fn of(key: &Unknown, value: Expr) -> Binding {
        Binding { key: key.clone(), ctx: key.ctx, value }
    }
}

/// Substitute concrete fragments for unknowns. Unknowns free in `r` are
/// replaced in place; an unknown bound by a presumption's own pattern
/// instead yields a new instance of that presumption, appended after it
/// while the general presumption stays.
pub fn instantiate(r: &Rule, bindings: &[Binding]) -> Result<Rule, RuleError> {
    for b in bindings {
        if b.ctx != b.key.ctx {
            return Err(RuleError::ContextMismatch { owner: b.key.owner.clone(), expected: b.key.ctx, found: b.ctx });
        }
    }
    let mut out = r.clone();
    for b in bindings {
        inst(&mut out, b);
    }
    Ok(out)
}

fn inst(r: &mut Rule, b: &Binding) {
    let mut i = 0;
    while i < r.presumptions.len() {
        if r.presumptions[i].pattern_unknowns().contains(&&b.key) {
            let mut copy = r.presumptions[i].clone();
            copy.replace(&b.key, &b.value);
            copy.memo = false;
            r.presumptions[i].memo = true;
            r.presumptions.insert(i + 1, copy);
            i += 2;
        } else {
            inst(&mut r.presumptions[i], b);
            i += 1;
        }
    }
    let rep = |f: &mut Fragment| {
        if matches!(f, Fragment::Unknown(u) if *u == b.key) {
            *f = Fragment::Concrete(b.value.clone());
        }
    };
    r.conclusion.slots.iter_mut().for_each(rep);
    for s in &mut r.meaning {
        if let Step::Bind { program, .. } = s {
            rep(program);
        }
    }
}

/// Hands out unknown identities and builds rules from signatures.
#[derive(Debug, Default)]
pub struct RuleFactory {
    next_uid: u32,
}

pub fn eta(k: usize) -> String {
    format!("η{k}")
}

impl RuleFactory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unknown(&mut self, ctx: Ctx, owner: &str) -> Unknown {
        self.next_uid += 1;
        Unknown { ctx, owner: owner.to_string(), uid: self.next_uid }
    }

    /// The def-macro for `sig`: a rule for applications of `sig.name`
    /// meaning `T_θ⟨meaning⟩`, with one presumption per by-name parameter
    /// over swapped contexts. With `cbv`, each by-value parameter is bound
    /// once to a fresh η and substituted into the meaning.
    pub fn defmac(&mut self, sig: &Signature, meaning: &Unknown, cbv: bool) -> Rule {
        let slot_ctx = meaning.ctx.other();
        let mut slots = Vec::new();
        let mut steps = Vec::new();
        let mut presumptions = Vec::new();
        let mut subsumed = Vec::new();
        for p in &sig.params {
            let name = p.name();
            let u = self.unknown(slot_ctx, name);
            slots.push(Fragment::Unknown(u.clone()));
            match p {
                ParamSpec::ByValue(_) if cbv => {
                    let v = eta(subsumed.len() + 1);
                    steps.push(Step::bind(&v, Fragment::Unknown(u)));
                    steps.push(Step::Subst { target: MathExpr::Sym(name.to_string()), replacement: MathExpr::Hole(v) });
                    subsumed.push(name.to_string());
                }
                ParamSpec::ByName(s) | ParamSpec::ByValue(s) => presumptions.push(self.defmac(s, &u, cbv)),
                ParamSpec::Operator(o) => {
                    presumptions.push(self.defmac(&Signature::nullary(&o.symbol), &u, cbv));
                }
            }
        }
        steps.push(Step::Bind {
            var: THETA.to_string(),
            program: Fragment::Unknown(meaning.clone()),
            local: Vec::new(),
            subsumed: subsumed.clone(),
        });
        Rule {
            conclusion: Pattern { head: sig.name.clone(), slots },
            meaning: steps,
            presumptions,
            subsumed,
            memo: false,
        }
    }

    /// Rule for applications of `sig.name` in terms of `D⟨f⟩`, the
    /// unknown returned alongside.
    pub fn application_rule(&mut self, sig: &Signature, cbv: bool) -> (Rule, Unknown) {
        let d = self.unknown(Ctx::D, &sig.name);
        (self.defmac(sig, &d, cbv), d)
    }

    fn scheme(&mut self, sig: &Signature, cbv: bool) -> Rule {
        let (app, d) = self.application_rule(sig, cbv);
        let e = self.unknown(Ctx::E, &sig.name);
        Rule {
            conclusion: Pattern { head: format!("DEF {}", sig.name), slots: vec![Fragment::Unknown(d), Fragment::Unknown(e.clone())] },
            meaning: vec![Step::bind_theta(Fragment::Unknown(e))],
            presumptions: vec![app],
            subsumed: Vec::new(),
            memo: false,
        }
    }

    /// The DEF-scheme instance for `sig`, reading every parameter by name.
    pub fn defscheme(&mut self, sig: &Signature) -> Rule {
        self.scheme(sig, false)
    }

    /// The DEF-scheme honouring by-value parameters.
    pub fn defscheme_cbv(&mut self, sig: &Signature) -> Rule {
        self.scheme(sig, true)
    }
}

/// Map of unknown uid to a value, used when comparing rules structurally.
pub type UidMap = HashMap<u32, u32>;

/// Structural equality up to renaming of unknown identities.
pub fn same_shape(a: &Rule, b: &Rule) -> bool {
    fn frag(x: &Fragment, y: &Fragment, m: &mut UidMap) -> bool {
        match (x, y) {
            (Fragment::Unknown(u), Fragment::Unknown(v)) => {
                u.ctx == v.ctx && u.owner == v.owner && *m.entry(u.uid).or_insert(v.uid) == v.uid
            }
            (Fragment::Concrete(e), Fragment::Concrete(f)) => e == f,
            _ => false,
        }
    }
    fn rule(a: &Rule, b: &Rule, m: &mut UidMap) -> bool {
        a.conclusion.head == b.conclusion.head
            && a.conclusion.slots.len() == b.conclusion.slots.len()
            && a.conclusion.slots.iter().zip(&b.conclusion.slots).all(|(x, y)| frag(x, y, m))
            && a.meaning.len() == b.meaning.len()
            && a.meaning.iter().zip(&b.meaning).all(|(s, t)| match (s, t) {
                (
                    Step::Bind { var: v, program: p, local: l, subsumed: s1 },
                    Step::Bind { var: w, program: q, local: k, subsumed: s2 },
                ) => v == w && frag(p, q, m) && s1 == s2 && l.len() == k.len() && l.iter().zip(k).all(|(x, y)| rule(x, y, m)),
                (Step::Subst { target: t1, replacement: r1 }, Step::Subst { target: t2, replacement: r2 }) => t1 == t2 && r1 == r2,
                _ => false,
            })
            && a.presumptions.len() == b.presumptions.len()
            && a.presumptions.iter().zip(&b.presumptions).all(|(x, y)| rule(x, y, m))
            && a.memo == b.memo
    }
    rule(a, b, &mut UidMap::new())
}
