//! The property suites, runnable from any test target.

use std::collections::{BTreeSet, HashMap};

use howard::eval::{Effect, Interp, Store};
use howard::lambda::{substitute, NameSupply, Term};
use howard::rules::Engine;
use howard::session::Session;
use howard::stdlib::{register_stdlib, rule_env, BUILTINS, PRELUDE, UNIX};
use howard::syntax::{desugar, parse_expression, parse_program, parse_signature, print_members, print_signature, Expr};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use super::*;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

// Capture-free substitution

const NAMES: [&str; 4] = ["x", "y", "z", "w"];

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0..NAMES.len()).prop_map(|k| Term::Var(NAMES[k].into())),
        (0i64..5).prop_map(Term::Int),
    ];
    leaf.prop_recursive(5, 24, 2, |inner| {
        prop_oneof![
            ((0..NAMES.len()), inner.clone()).prop_map(|(k, b)| Term::Abs(NAMES[k].into(), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::App(Box::new(f), Box::new(a))),
            (inner.clone(), inner).prop_map(|(l, r)| Term::Prim("+".into(), Box::new(l), Box::new(r))),
        ]
    })
}

/// Nameless form; free names stay as they are.
#[derive(Debug, PartialEq, Clone)]
enum Db {
    Bound(usize),
    Free(String),
    Lam(Box<Db>),
    App(Box<Db>, Box<Db>),
    Int(i64),
    Prim(String, Box<Db>, Box<Db>),
}

fn db(t: &Term, ctx: &mut Vec<String>) -> Db {
    match t {
        Term::Var(x) => match ctx.iter().rev().position(|b| b == x) {
            Some(k) => Db::Bound(k),
            None => Db::Free(x.clone()),
        },
        Term::Abs(x, b) => {
            ctx.push(x.clone());
            let body = db(b, ctx);
            ctx.pop();
            Db::Lam(Box::new(body))
        }
        Term::App(f, a) => Db::App(Box::new(db(f, ctx)), Box::new(db(a, ctx))),
        Term::Int(n) => Db::Int(*n),
        Term::Prim(o, l, r) => Db::Prim(o.clone(), Box::new(db(l, ctx)), Box::new(db(r, ctx))),
    }
}

fn shift(d: &Db, by: usize, cutoff: usize) -> Db {
    match d {
        Db::Bound(k) if *k >= cutoff => Db::Bound(k + by),
        Db::Bound(_) | Db::Free(_) | Db::Int(_) => d.clone(),
        Db::Lam(b) => Db::Lam(Box::new(shift(b, by, cutoff + 1))),
        Db::App(f, a) => Db::App(Box::new(shift(f, by, cutoff)), Box::new(shift(a, by, cutoff))),
        Db::Prim(o, l, r) => Db::Prim(o.clone(), Box::new(shift(l, by, cutoff)), Box::new(shift(r, by, cutoff))),
    }
}

/// Replace the free name `x` by `s`, nameless, so capture cannot happen.
fn db_subst(d: &Db, x: &str, s: &Db, depth: usize) -> Db {
    match d {
        Db::Free(y) if y == x => shift(s, depth, 0),
        Db::Bound(_) | Db::Free(_) | Db::Int(_) => d.clone(),
        Db::Lam(b) => Db::Lam(Box::new(db_subst(b, x, s, depth + 1))),
        Db::App(f, a) => Db::App(Box::new(db_subst(f, x, s, depth)), Box::new(db_subst(a, x, s, depth))),
        Db::Prim(o, l, r) => Db::Prim(o.clone(), Box::new(db_subst(l, x, s, depth)), Box::new(db_subst(r, x, s, depth))),
    }
}


// Effect counts by passing mode

fn body(refs: &[bool]) -> String {
    if refs.is_empty() {
        return "0".into();
    }
    let parts: Vec<&str> = refs.iter().map(|&r| if r { "A" } else { "0" }).collect();
    parts.join("+")
}

fn prints(src: &str) -> (i64, usize) {
    let mut s = Session::new(Interp::new(Store::default()));
    let v = s.load(src).unwrap();
    let n = s.interp.store.log.iter().filter(|e| matches!(e, Effect::Print(p) if p == "S")).count();
    match v {
        Some(howard::eval::Value::Int(v)) => (v, n),
        v => panic!("{v:?}"),
    }
}


// Parse and print

fn corpus() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for dir in ["programs", "pure"] {
        for e in std::fs::read_dir(data(dir)).unwrap() {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "how") {
                out.push((p.display().to_string(), std::fs::read_to_string(&p).unwrap()));
            }
        }
    }
    out.push(("prelude".into(), PRELUDE.into()));
    out
}

fn corpus_round_trips() {
    for (name, src) in corpus() {
        let tree = parse_program(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = print_members(&tree);
        let again = parse_program(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(again, tree, "{name}\n{printed}");
        assert_eq!(print_members(&again), printed, "{name}");
    }
}

fn signatures_round_trip() {
    let mut sigs: Vec<&str> = BUILTINS.iter().map(|(s, _)| *s).collect();
    sigs.push(UNIX);
    for src in sigs {
        let sig = parse_signature(src).unwrap();
        let printed = print_signature(&sig);
        assert_eq!(parse_signature(&printed).unwrap(), sig, "{printed}");
    }
    let unix = print_signature(&parse_signature(UNIX).unwrap());
    for member in ["newpipe", "mk_stdin", "mk_n", "await_all", "Con OF IO", "IO List"] {
        assert!(unix.contains(member), "{member}: {unix}");
    }
}

fn arith() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![(0i64..100).prop_map(|n| n.to_string()), Just("sq{3}".to_string())];
    leaf.prop_recursive(4, 16, 2, |inner| {
        (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "<", "="]), inner)
            .prop_map(|(l, o, r)| format!("({l} {o} {r})"))
    })
}


// Stability under fresh-name reseeding

/// Fresh chain variables renamed by order of first appearance.
fn canon(text: &str) -> String {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = String::new();
    let cs: Vec<char> = text.chars().collect();
    let mut k = 0;
    while k < cs.len() {
        let c = cs[k];
        if matches!(c, 'τ' | 'η' | 'μ') && cs.get(k + 1).is_some_and(|d| d.is_ascii_digit()) {
            let mut j = k + 1;
            while j < cs.len() && cs[j].is_ascii_digit() {
                j += 1;
            }
            let name: String = cs[k..j].iter().collect();
            let n = seen.len();
            let n = *seen.entry(name).or_insert(n);
            out.push_str(&format!("{c}#{n}"));
            k = j;
        } else {
            out.push(c);
            k += 1;
        }
    }
    out
}

fn traced(src: &str, seed: u64) -> (i64, Vec<String>) {
    let lib = register_stdlib(&howard::eval::Env::new());
    let mut engine = Engine::with_seed(seed);
    let env = rule_env(&mut engine, &lib.defs);
    engine.trace = Some(Vec::new());
    let core = desugar(&Expr::seq(parse_program(src).unwrap()), &mut lib.env.sig_env()).unwrap();
    let m = engine.meaning(&core, &env).unwrap();
    (m.evaluate::<i64>().unwrap(), engine.trace.take().unwrap())
}


fn run<S: Strategy>(cases: u32, strategy: &S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner(cases).run(strategy, test).map_err(|e| e.to_string())
}

/// (a) Substitution agrees with a nameless reference and never captures.
pub fn capture_freedom(cases: u32) -> Result<(), String> {
    run(cases, &(term(), term(), 0..NAMES.len()), |(t, s, k)| {
        let x = NAMES[k];
        let got = substitute(&t, x, &s, &mut NameSupply::default());
        let want = db_subst(&db(&t, &mut Vec::new()), x, &db(&s, &mut Vec::new()), 0);
        prop_assert_eq!(db(&got, &mut Vec::new()), want);
        let mut fv: BTreeSet<String> = t.free_vars().into_iter().filter(|v| v != x).collect();
        if t.is_free(x) {
            fv.extend(s.free_vars());
        }
        prop_assert_eq!(got.free_vars().into_iter().collect::<BTreeSet<_>>(), fv);
        Ok(())
    })
}

/// (b) A by-name argument runs once per reference, a by-value one once.
pub fn effect_counts(cases: u32) -> Result<(), String> {
    let refs = prop::collection::vec(any::<bool>(), 0..8).prop_filter("at most 5 references", |r| r.iter().filter(|&&b| b).count() <= 5);
    run(cases, &refs, |refs| {
        let k = refs.iter().filter(|&&r| r).count();
        let b = body(&refs);
        let cbn = format!(r#"DEF rep [A:int]:int {{{b}}} {{rep{{stdout << "S"; 1}}}}"#);
        let cbv = format!(r#"DEF rep (A:int):int {{{b}}} {{rep{{stdout << "S"; 1}}}}"#);
        prop_assert_eq!(prints(&cbn), (k as i64, k));
        prop_assert_eq!(prints(&cbv), (k as i64, 1));
        Ok(())
    })
}

/// (c) Evaluator, lambda normal form and rule reduction give the noted value.
pub fn oracle_triangle() -> Result<(), String> {
    let corpus = pure_corpus();
    if corpus.len() < 25 {
        return Err(format!("only {} pure programs", corpus.len()));
    }
    let mut bad = Vec::new();
    for (name, src, note) in &corpus {
        let got = (by_evaluator(src), by_lambda(src), by_rules(src));
        if got != (*note, *note, *note) {
            bad.push(format!("{name}: noted {note}, got {got:?}"));
        }
    }
    if bad.is_empty() { Ok(()) } else { Err(bad.join("\n")) }
}

/// (d) Printing then parsing gives the same tree.
pub fn round_trip(cases: u32) -> Result<(), String> {
    let caught = |f: fn()| std::panic::catch_unwind(f).map_err(|e| e.downcast_ref::<String>().cloned().unwrap_or_default());
    caught(corpus_round_trips)?;
    caught(signatures_round_trip)?;
    run(cases, &arith(), |src| {
        let e = parse_expression(&src).unwrap();
        let printed = print_members(std::slice::from_ref(&e));
        prop_assert_eq!(parse_expression(&printed).unwrap(), e);
        Ok(())
    })
}

/// (e) Derivations differ only in fresh names when counters are reseeded.
pub fn reseeding(cases: u32) -> Result<(), String> {
    let corpus = pure_corpus();
    run(cases, &(1u64..1_000_000, 0..corpus.len()), |(seed, pick)| {
        let src = &corpus[pick].1;
        let (v0, t0) = traced(src, 0);
        let (v1, t1) = traced(src, seed);
        prop_assert_eq!(v0, v1);
        prop_assert_eq!(t0.len(), t1.len());
        for (a, b) in t0.iter().zip(&t1) {
            prop_assert_eq!(canon(a), canon(b));
        }
        Ok(())
    })
}
