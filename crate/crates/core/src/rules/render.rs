//! Text and LaTeX rendering of rules and chains.

use super::math::{latex_name, MathExpr, THETA};
use super::rule::{Chain, Ctx, Fragment, Pattern, Rule, Step};
use crate::syntax::{print_expr, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Latex,
}

pub fn render(r: &Rule, format: Format) -> String {
    match format {
        Format::Text => {
            let mut out = String::new();
            text_rule(&mut out, r, 0);
            out
        }
        Format::Latex => latex_rule(r),
    }
}

pub fn fragment_text(f: &Fragment) -> String {
    match f {
        Fragment::Unknown(u) => match u.ctx {
            Ctx::D => format!("D⟨{}⟩", u.owner),
            Ctx::E => format!("E⟨{}⟩", u.owner),
        },
        Fragment::Concrete(e) => print_expr(e),
    }
}

pub fn pattern_text(p: &Pattern) -> String {
    let mut out = p.head.clone();
    for s in &p.slots {
        out.push('{');
        out.push_str(&fragment_text(s));
        out.push('}');
    }
    out
}

fn var_text(v: &str) -> String {
    format!("T_{v}")
}

pub fn steps_text(steps: &[Step]) -> String {
    let mut out = String::new();
    for s in steps {
        match s {
            Step::Bind { var, program, local, .. } => {
                out.push_str(&format!("{}⟨{}⟩", var_text(var), fragment_text(program)));
                if !local.is_empty() {
                    let inner: Vec<String> = local.iter().map(one_line).collect();
                    out.push_str(&format!(" ⊣ ({})", inner.join("; ")));
                }
            }
            Step::Subst { target, replacement } => out.push_str(&format!("[{replacement}/{target}]")),
        }
    }
    out
}

/// A rule on a single line, nested presumptions in parentheses.
pub fn one_line(r: &Rule) -> String {
    if r.memo {
        return "…".into();
    }
    let mut out = format!("{} ⟶ {}", pattern_text(&r.conclusion), steps_text(&r.meaning));
    if !r.presumptions.is_empty() {
        let inner: Vec<String> = r.presumptions.iter().map(one_line).collect();
        out.push_str(&format!(" ⊣ ({})", inner.join("; ")));
    }
    out
}

fn text_rule(out: &mut String, r: &Rule, indent: usize) {
    let pad = " ".repeat(indent);
    if r.memo {
        out.push_str(&format!("{pad}…\n"));
        return;
    }
    out.push_str(&format!("{pad}{} ⟶ {}", pattern_text(&r.conclusion), steps_text(&r.meaning)));
    if r.presumptions.is_empty() {
        out.push_str(" ⊣ ∅\n");
    } else {
        out.push_str(" ⊣ {\n");
        for p in &r.presumptions {
            text_rule(out, p, indent + 2);
        }
        out.push_str(&format!("{pad}}}\n"));
    }
}

pub fn chain_text(c: &Chain) -> String {
    let steps = steps_text(&c.steps);
    let theta = MathExpr::Hole(THETA.into());
    if steps.is_empty() {
        c.terminal.to_string()
    } else if c.terminal == theta {
        steps
    } else {
        format!("{steps} {}", c.terminal)
    }
}

fn latex_escape(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        match ch {
            '{' => out.push_str("\\{"),
            '}' => out.push_str("\\}"),
            '_' => out.push_str("\\_"),
            '#' => out.push_str("\\#"),
            '~' => out.push_str("\\~{}"),
            c => out.push(c),
        }
    }
    out
}

fn fragment_latex(f: &Fragment) -> String {
    match f {
        Fragment::Unknown(u) => match u.ctx {
            Ctx::D => format!("\\scope[D]{{{}}}", latex_escape(&u.owner)),
            Ctx::E => format!("\\scope{{{}}}", latex_escape(&u.owner)),
        },
        Fragment::Concrete(e) => latex_escape(&print_expr(e)),
    }
}

fn pattern_latex(p: &Pattern) -> String {
    let mut out = latex_escape(&p.head);
    for s in &p.slots {
        out.push_str(&format!("\\{{{}\\}}", fragment_latex(s)));
    }
    out
}

pub fn steps_latex(steps: &[Step]) -> String {
    let mut out = String::new();
    for s in steps {
        match s {
            Step::Bind { var, program, local, .. } => {
                if var == THETA {
                    out.push_str(&format!("\\TE{{{}}}", fragment_latex(program)));
                } else {
                    out.push_str(&format!("\\TE[{}]{{{}}}", latex_name(var), fragment_latex(program)));
                }
                if !local.is_empty() {
                    let inner: Vec<String> = local.iter().map(latex_rule).collect();
                    out.push_str(&format!("\\presume{{{}}}", inner.join("\\\\\n")));
                }
            }
            Step::Subst { target, replacement } => {
                if matches!(target, MathExpr::Hole(h) if h == THETA) {
                    out.push_str(&format!("\\Subst{{{}}}", replacement.to_latex()));
                } else {
                    out.push_str(&format!("\\Subst[{}]{{{}}}", target.to_latex(), replacement.to_latex()));
                }
            }
        }
    }
    out
}

fn latex_rule(r: &Rule) -> String {
    if r.memo {
        return "...".into();
    }
    let left = pattern_latex(&r.conclusion);
    let right = steps_latex(&r.meaning);
    if r.presumptions.is_empty() {
        format!("\\Rule{{{left}}}{{{right}}}")
    } else {
        let inner: Vec<String> = r.presumptions.iter().map(latex_rule).collect();
        format!("\\Rule[\\presume{{\n{}\n}}]\n{{{left}}}{{{right}}}", inner.join("\\\\\n"))
    }
}

/// The signature laid out with one parameter per line.
pub fn signature_block(sig: &Signature) -> String {
    let head = crate::syntax::print_signature(&Signature { params: Vec::new(), result: None, ..sig.clone() });
    let mut out = format!("    {}\n", head.trim_end());
    for p in &sig.params {
        let one = Signature { name: String::new(), type_params: Vec::new(), params: vec![p.clone()], result: None };
        let printed = crate::syntax::print_signature(&one);
        out.push_str(&format!("       {printed}\n"));
    }
    if let Some(r) = &sig.result {
        out.pop();
        out.push_str(&format!(":{r}\n"));
    }
    out
}

/// The LaTeX document fragment `defrule` prints: signature then rule.
pub fn defrule_latex(sig: &Signature, r: &Rule) -> String {
    format!("\\begin{{verbatim}}\n{}\\end{{verbatim}}\n\n\\ensuremath{{{}}}\n", signature_block(sig), latex_rule(r))
}

pub fn defrule_text(sig: &Signature, r: &Rule) -> String {
    format!("{}\n{}", signature_block(sig), render(r, Format::Text))
}

