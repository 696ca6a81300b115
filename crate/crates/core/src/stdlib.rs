//! Predefined operations.

use crate::eval::{Builtin, Env, EvalError};
use crate::rules::math::{MathExpr, THETA};
use crate::rules::{Fragment, Pattern, Rule, Step};
use crate::syntax::{desugar, parse_operator_signature, parse_program, parse_signature, Expr, OperatorSig, Signature};
use crate::types::Typer;

/// Operations defined in the language itself.
pub const PRELUDE: &str = "\
DEF program OF T [Body:T]:T {Body};
DEF with OF T,W (X:T) [Body(__:T):W]:W {Body{X}};
";

type Maker = fn() -> Builtin;

pub const BUILTINS: [(&str, Maker); 12] = [
    ("if OF T (C:bool) [Then:T] [Else:T]:T", || Builtin::If),
    ("var OF w, rvalue [Scope OF lvalue (__:lvalue) [_:rvalue] [:=(lvalue,rvalue) : rvalue]:w]:w", || Builtin::Var),
    ("while [Cond:bool] [Body:void]:void", || Builtin::While),
    ("loop [Body:void]:void", || Builtin::Loop),
    (
        "induction OF Problem, Result [Initial:Problem] [Break_down[__:Problem] [result[Sub:Problem]:Result]:Result]:Result",
        || Builtin::Induction,
    ),
    ("split_list OF T,W [l: T List][Empty:W][Cons[hd:T][tl:T List]:W]:W", || Builtin::SplitList),
    ("nil OF T : T List", || Builtin::Nil),
    ("stdout : Output", || Builtin::Stdout),
    ("nl : string", || Builtin::Nl),
    ("sort OF T,W [InOrder[x:T][y:T]:bool] [Send[put[X:T]]] [Receive[all[Body[x:T]]]:W]:W", || Builtin::Sort),
    ("INTERPRET", || Builtin::Interpret),
    (UNIX, || Builtin::Unimplemented),
];

pub const OPERATORS: [&str; 2] = [":: OF T (T, T List): T List", "<< OF T (Output, T): Output"];

/// Process control; declared so programs using it parse and type-check.
pub const UNIX: &str = "\
unix
   [Members OF PIPE, PID
      [newpipe:PIPE]
      [child[Init[exec(arg:string Array)]]:PID]
      [mk_stdin(x:PIPE)]
      [mk_n(x:PIPE)]
      [mk_stderr(x:PIPE)]
      [source OF W
         (x:PIPE)
         [Access(in:Input, __:Input):W]:W]
      [dest OF W
         (x:PIPE)
         [Access(out:Output, __:Output):W]:W]
      [close(x:PIPE)]
      [kill(p:PID)]
      [await(id:PID):int]
      [await_all]
      [run(Cmd:string Array)
         [Con OF IO
            [<(NONE,string) : IO]
            [>(NONE,string) : IO]
            [>>(NONE,string) : IO]
            [<(NONE,PIPE) : IO]
            [>(NONE,PIPE) : IO]
            [<(NONE,Input) : IO]
            [>(NONE,Output) : IO]:IO List]]]";

pub fn operators() -> Vec<OperatorSig> {
    OPERATORS.iter().map(|o| parse_operator_signature(o).expect("operator signature")).collect()
}

/// Desugar `body` as the definition body of `sig` in `env`.
pub fn definition_body(env: &Env, sig: &Signature, body: &Expr) -> Result<Expr, EvalError> {
    let mut sigs = env.sig_env();
    sigs.bind_op(sig.clone());
    sigs.bind_params(sig);
    Ok(desugar(body, &mut sigs)?)
}

/// Operations defined by `source`, a list of `DEF` declarations.
pub fn declare(env: &Env, source: &str) -> Result<(Env, Vec<(Signature, Expr)>), EvalError> {
    let mut env = env.clone();
    let mut defs = Vec::new();
    for m in parse_program(source)? {
        if let Expr::Def { sig, body, app: None, .. } = m {
            let body = definition_body(&env, &sig, &body)?;
            env = env.define(sig.clone(), body.clone());
            defs.push((sig, body));
        }
    }
    Ok((env, defs))
}

pub struct Stdlib {
    pub env: Env,
    /// In-language definitions, desugared.
    pub defs: Vec<(Signature, Expr)>,
}

pub fn register_stdlib(env: &Env) -> Stdlib {
    let mut env = env.clone();
    for (src, b) in BUILTINS {
        env = env.bind_builtin(parse_signature(src).expect("builtin signature"), b());
    }
    let (env, defs) = declare(&env, PRELUDE).expect("prelude");
    Stdlib { env, defs }
}

/// A type checker knowing every operation bound in `env`.
pub fn typer(env: &Env) -> Typer {
    let mut t = Typer::new();
    for o in operators() {
        t.bind_operator(o);
    }
    for s in env.signatures() {
        t.bind_op((*s).clone());
    }
    t
}

/// The rules-engine environment with the in-language definitions.
pub fn rule_env(engine: &mut crate::rules::Engine, defs: &[(Signature, Expr)]) -> crate::rules::Env {
    let mut env = crate::rules::Env::new();
    for (sig, body) in defs {
        env = engine.define(&env, sig, body);
    }
    env
}

/// `induction{E⟨Initial⟩}{E⟨Break_down⟩}`: the step is reduced with `__`
/// standing for the problem size `k`, and with the hypothesis that
/// `result` on a smaller problem yields its claimed value.
pub fn induction_rule() -> Rule {
    let mut f = crate::rules::RuleFactory::new();
    let initial = f.unknown(crate::rules::Ctx::E, "Initial");
    let step = f.unknown(crate::rules::Ctx::E, "Break_down");
    let sub = f.unknown(crate::rules::Ctx::D, "Sub");
    let eta = "η1";
    let index = Rule::new(
        Pattern { head: "__".into(), slots: Vec::new() },
        vec![Step::Subst { target: MathExpr::Hole(THETA.into()), replacement: MathExpr::Sym("k".into()) }],
    );
    let hypothesis = Rule::new(
        Pattern { head: "result".into(), slots: vec![Fragment::Unknown(sub.clone())] },
        vec![
            Step::bind(eta, Fragment::Unknown(sub)),
            Step::Subst {
                target: MathExpr::Hole(THETA.into()),
                replacement: MathExpr::Call("result".into(), vec![MathExpr::Hole(eta.into())]),
            },
        ],
    );
    Rule {
        conclusion: Pattern {
            head: "induction".into(),
            slots: vec![Fragment::Unknown(initial.clone()), Fragment::Unknown(step.clone())],
        },
        meaning: vec![
            Step::bind(eta, Fragment::Unknown(initial)),
            Step::Subst { target: MathExpr::Sym("k".into()), replacement: MathExpr::Hole(eta.into()) },
            Step::bind_theta(Fragment::Unknown(step)),
        ],
        presumptions: vec![index, hypothesis],
        subsumed: vec!["k".into()],
        memo: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Interp, Value};
    use crate::rules::render::one_line;

    fn run(src: &str) -> (Value, String) {
        let lib = register_stdlib(&Env::new());
        let mut i = Interp::default();
        let v = i.eval_source(src, &lib.env).unwrap();
        (v, i.store.effect_dump())
    }

    #[test]
    fn every_signature_parses() {
        let lib = register_stdlib(&Env::new());
        for name in ["program", "with", "if", "var", "while", "loop", "induction", "split_list", "nil", "sort", "unix"] {
            assert!(lib.env.operation(name).is_some(), "{name}");
        }
        assert_eq!(operators().len(), 2);
    }

    #[test]
    fn product_by_induction() {
        assert_eq!(run("induction{[3,5,7]} L: { split_list{L}{1}{hd*result{tl}} }").0, Value::Int(105));
    }

    #[test]
    fn odd_sum_by_induction() {
        assert_eq!(run("induction(5) i:{if(i=0,0,(2*i-1)+result(i-1))}").0, Value::Int(25));
    }

    #[test]
    fn sort_receives_in_order() {
        let (v, log) = run("sort{x<y}{put(3); put(1); put(2)}{all{stdout << x << nl}; 0}");
        assert_eq!(v, Value::Int(0));
        assert_eq!(log, "PRINT 1\nPRINT \\n\nPRINT 2\nPRINT \\n\nPRINT 3\nPRINT \\n\n");
    }

    #[test]
    fn while_matches_induction() {
        for n in 0..=20 {
            let w = format!("var x; x:=0; var i; i:=0; while{{i<{n}}}{{i:=i+1; x:=x+2*i-1}}; x");
            assert_eq!(run(&w).0, Value::Int(n * n));
            let ind = format!("var x; x:=0; induction({n}) i:{{if(i=0,x){{result(i-1); x:=x+2*i-1}}}}");
            assert_eq!(run(&ind).0, Value::Int(n * n));
        }
    }

    #[test]
    fn program_is_identity() {
        assert_eq!(run("{stdout << 1; 2}").1, run("stdout << 1; 2").1);
        assert_eq!(run("{stdout << 1; 2}").0, Value::Int(2));
    }

    #[test]
    fn unix_is_declared_only() {
        let lib = register_stdlib(&Env::new());
        let mut i = Interp::default();
        let r = i.eval_source("unix{await_all}", &lib.env);
        assert!(matches!(r, Err(EvalError::Unimplemented { .. })));
    }

    #[test]
    fn induction_rule_shape() {
        let r = induction_rule();
        let text = one_line(&r);
        assert!(text.starts_with("induction{E⟨Initial⟩}{E⟨Break_down⟩} ⟶"), "{text}");
        assert!(text.contains("result{D⟨Sub⟩}"), "{text}");
    }
}
