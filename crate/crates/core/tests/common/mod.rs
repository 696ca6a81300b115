#![allow(dead_code)]

use std::path::PathBuf;

use howard::cli::{execute, Cli, Io, Outcome};
use howard::eval::{Env, Interp, Lines, Store, Value};
use howard::lambda::{normalize, translate, NameSupply, Term};
use howard::rules::Engine;
use howard::session::Session;
use howard::stdlib::{register_stdlib, rule_env};
use howard::syntax::{desugar, parse_program, Expr};

use clap::Parser;

pub mod latex;
pub mod suites;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(data(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Pure programs with the value noted on their last line.
pub fn pure_corpus() -> Vec<(String, String, i64)> {
    let mut files: Vec<_> = std::fs::read_dir(data("pure")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let src = std::fs::read_to_string(&p).unwrap();
            let note = src.lines().last().unwrap().trim_start_matches('#').trim().parse().unwrap();
            (p.file_name().unwrap().to_string_lossy().into_owned(), src, note)
        })
        .collect()
}

fn core(src: &str) -> Expr {
    let lib = register_stdlib(&Env::new());
    desugar(&Expr::seq(parse_program(src).unwrap()), &mut lib.env.sig_env()).unwrap()
}

pub fn by_evaluator(src: &str) -> i64 {
    let mut s = Session::new(Interp::new(Store::default()));
    match s.load(src).unwrap() {
        Some(Value::Int(n)) => n,
        v => panic!("not an int: {v:?}"),
    }
}

pub fn by_lambda(src: &str) -> i64 {
    let lib = register_stdlib(&Env::new());
    let mut ns = NameSupply::default();
    let t = translate(&core(src), &lib.env.sig_env(), &mut ns).unwrap();
    match normalize(&t, howard::lambda::DEFAULT_FUEL, &mut ns).unwrap() {
        Term::Int(n) => n,
        t => panic!("normal form is not a number: {t}"),
    }
}

pub fn by_rules_seeded(src: &str, seed: u64) -> i64 {
    let lib = register_stdlib(&Env::new());
    let mut engine = Engine::with_seed(seed);
    let env = rule_env(&mut engine, &lib.defs);
    engine.meaning(&core(src), &env).unwrap().evaluate::<i64>().unwrap()
}

pub fn by_rules(src: &str) -> i64 {
    by_rules_seeded(src, 0)
}

/// Run the command line with `args` and `stdin`.
pub fn cli(args: &[&str], stdin: &str) -> Outcome {
    let mut argv = vec!["howard"];
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(argv).unwrap();
    execute(&cli, Io { input: Box::new(Lines::new(stdin)), sink: None, echo: true })
}
