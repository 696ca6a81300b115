//! Source printing (round-trips through the parser) and the node-per-line dump.

use std::fmt::Write;

use super::ast::*;
use super::parser::{precedence, Assoc};

pub fn print_signature(s: &Signature) -> String {
    let mut out = String::new();
    write_signature(&mut out, s);
    out
}

fn write_type_params(out: &mut String, tps: &[TypeParam]) {
    if tps.is_empty() {
        return;
    }
    out.push_str(" OF ");
    for (i, tp) in tps.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if let Some(a) = tp.arity {
            let _ = write!(out, "{a} ");
        }
        out.push_str(&tp.name);
    }
    out.push(' ');
}

fn write_operator(out: &mut String, o: &OperatorSig) {
    out.push_str(&o.symbol);
    write_type_params(out, &o.type_params);
    let _ = write!(out, "({},{}):{}", o.lhs, o.rhs, o.result);
}

fn write_signature(out: &mut String, s: &Signature) {
    out.push_str(&s.name);
    write_type_params(out, &s.type_params);
    let mut i = 0;
    while i < s.params.len() {
        if s.params[i].is_by_value() {
            out.push('(');
            let mut first = true;
            while i < s.params.len() && s.params[i].is_by_value() {
                if !first {
                    out.push(',');
                }
                first = false;
                match &s.params[i] {
                    ParamSpec::ByValue(v) => write_signature(out, v),
                    ParamSpec::Operator(o) => write_operator(out, o),
                    ParamSpec::ByName(_) => unreachable!(),
                }
                i += 1;
            }
            out.push(')');
        } else {
            out.push('[');
            match &s.params[i] {
                ParamSpec::ByName(n) => write_signature(out, n),
                ParamSpec::Operator(o) => write_operator(out, o),
                ParamSpec::ByValue(_) => unreachable!(),
            }
            out.push(']');
            i += 1;
        }
    }
    if let Some(r) = &s.result {
        let _ = write!(out, ":{r}");
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

/// Members joined by `;`, as a program file or brace body.
pub fn print_members(ms: &[Expr]) -> String {
    ms.iter().map(print_expr).collect::<Vec<_>>().join(";")
}

fn write_body(out: &mut String, body: &Expr) {
    out.push('{');
    match body {
        Expr::Seq(ms) => out.push_str(&print_members(ms)),
        other => write_expr(out, other, 0),
    }
    out.push('}');
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// `ctx` is the minimum precedence an infix child may have without parens.
fn write_expr(out: &mut String, e: &Expr, ctx: u8) {
    match e {
        Expr::Int(v) if *v < 0 => {
            let _ = write!(out, "({v})");
        }
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Str(s) => out.push_str(&escape(s)),
        Expr::Seq(ms) | Expr::Block(ms) => {
            out.push('{');
            out.push_str(&print_members(ms));
            out.push('}');
        }
        Expr::List(items) => {
            out.push('[');
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_expr(out, it, 0);
            }
            out.push(']');
        }
        Expr::Def { sig, body, app, .. } => {
            let paren = ctx > 0;
            if paren {
                out.push('(');
            }
            out.push_str("DEF ");
            write_signature(out, sig);
            out.push(' ');
            write_body(out, body);
            if let Some(app) = app {
                write_body(out, app);
            }
            if paren {
                out.push(')');
            }
        }
        Expr::Apply(a) => write_apply(out, a),
        Expr::Infix { op, lhs, rhs, .. } => {
            let (prec, assoc) = precedence(op);
            let paren = prec < ctx;
            if paren {
                out.push('(');
            }
            let (lctx, rctx) = match assoc {
                Assoc::Left => (prec, prec + 1),
                Assoc::Right => (prec + 1, prec),
                Assoc::None => (prec + 1, prec + 1),
            };
            write_expr(out, lhs, lctx.max(1));
            out.push_str(op);
            write_expr(out, rhs, rctx.max(1));
            if paren {
                out.push(')');
            }
        }
    }
}

fn write_apply(out: &mut String, a: &Apply) {
    if let Some(q) = &a.qualifier {
        out.push_str(q);
        out.push('.');
    }
    out.push_str(&a.op);
    let mut in_values = false;
    for arg in &a.args {
        match arg.passing {
            Passing::Values if in_values && arg.label.is_none() => out.push(','),
            _ => {
                if in_values {
                    out.push(')');
                    in_values = false;
                }
                if let Some(l) = &arg.label {
                    let _ = write!(out, " {l}:");
                }
                if arg.passing == Passing::Values {
                    out.push('(');
                    in_values = true;
                }
            }
        }
        match arg.passing {
            Passing::Values => write_expr(out, &arg.body, 0),
            Passing::Braces => write_body(out, &arg.body),
        }
    }
    if in_values {
        out.push(')');
    }
    if let Some(l) = &a.decl_label {
        let _ = write!(out, " {l}");
    }
}

/// One node per line, two-space indentation.
pub fn dump(e: &Expr) -> String {
    let mut out = String::new();
    dump_into(&mut out, e, 0);
    out
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(text);
    out.push('\n');
}

fn dump_into(out: &mut String, e: &Expr, depth: usize) {
    match e {
        Expr::Int(v) => line(out, depth, &format!("(int {v})")),
        Expr::Str(s) => line(out, depth, &format!("(str {})", escape(s))),
        Expr::Seq(ms) => {
            line(out, depth, "(seq");
            ms.iter().for_each(|m| dump_into(out, m, depth + 1));
            line(out, depth, ")");
        }
        Expr::Block(ms) => {
            line(out, depth, "(block");
            ms.iter().for_each(|m| dump_into(out, m, depth + 1));
            line(out, depth, ")");
        }
        Expr::List(ms) => {
            line(out, depth, "(list");
            ms.iter().for_each(|m| dump_into(out, m, depth + 1));
            line(out, depth, ")");
        }
        Expr::Apply(a) => {
            let head = match &a.qualifier {
                Some(q) => format!("{q}.{}", a.op),
                None => a.op.clone(),
            };
            if a.args.is_empty() {
                line(out, depth, &format!("(apply {head})"));
                return;
            }
            line(out, depth, &format!("(apply {head}"));
            for arg in &a.args {
                let kind = match arg.passing {
                    Passing::Braces => "arg",
                    Passing::Values => "val",
                };
                match &arg.label {
                    Some(l) => line(out, depth + 1, &format!("({kind} {l}:")),
                    None => line(out, depth + 1, &format!("({kind}")),
                }
                dump_into(out, &arg.body, depth + 2);
                line(out, depth + 1, ")");
            }
            line(out, depth, ")");
        }
        Expr::Infix { op, owner, lhs, rhs, .. } => {
            match owner {
                Some(o) => line(out, depth, &format!("(infix {o}.{op}")),
                None => line(out, depth, &format!("(infix {op}")),
            }
            dump_into(out, lhs, depth + 1);
            dump_into(out, rhs, depth + 1);
            line(out, depth, ")");
        }
        Expr::Def { sig, body, app, .. } => {
            line(out, depth, &format!("(def {}", print_signature(sig)));
            dump_into(out, body, depth + 1);
            if let Some(app) = app {
                dump_into(out, app, depth + 1);
            }
            line(out, depth, ")");
        }
    }
}
