mod common;

use std::io::Write;
use std::process::{Command, Stdio};

use common::{cli, data};

fn path(rel: &str) -> String {
    data(rel).display().to_string()
}

fn binary(args: &[&str], stdin: &str, env: &[(&str, &str)]) -> (i32, String, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_howard"))
        .args(args)
        .envs(env.iter().copied())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn type_errors_are_positioned() {
    let out = cli(&["run", &path("programs/type_error.how")], "");
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("type_error.how: type error: at 2:"), "{}", out.stderr);
    assert!(out.stdout.is_empty());
}

#[test]
fn exit_codes() {
    assert_eq!(binary(&["run", &path("programs/r.how")], "", &[]).0, 0);
    assert_eq!(binary(&["run", &path("programs/no_such_file.how")], "", &[]).0, 2);
    assert_eq!(binary(&["frobnicate"], "", &[]).0, 2);
    let (code, _, err) = binary(&["specialize", "down", "--load", &path("programs/recursive.how")], "", &[]);
    assert_eq!(code, 1);
    assert!(err.contains("D⟨down⟩"), "{err}");
}

#[test]
fn binary_replays_the_by_name_transcript() {
    let (code, out, _) = binary(&["run", &path("programs/demo_cbn.how")], &common::read("programs/step.in"), &[]);
    assert_eq!(code, 0);
    assert_eq!(out, common::read("golden/demo_cbn.txt"));
}

#[test]
fn fuel_from_the_environment() {
    let (code, _, err) = binary(&["run", &path("programs/r.how")], "", &[("HOWARD_FUEL", "5")]);
    assert_eq!(code, 1);
    assert!(err.contains("5 steps"), "{err}");
    let out = cli(&["--fuel", "5", "run", &path("programs/r.how")], "");
    assert_eq!(out.code, 1);
}

#[test]
fn dump_types_lists_solved_parameters() {
    let out = cli(&["check", &path("programs/demo_cbn.how"), "--dump-types"], "");
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.lines().any(|l| l.ends_with("twice: W=void")), "{}", out.stdout);
    let bad = cli(&["check", &path("programs/type_error.how")], "");
    assert_eq!(bad.code, 1);
}

#[test]
fn repl_prompts_and_persistent_definitions() {
    let input = "DEF sq [X:int]:int {X*X};\nsq{\n4}\nnope{1}\n2+3\n";
    let out = cli(&["repl"], input);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let want = "1> DEF sq [X:int]:int {X*X};\n2> sq{\n3> 4}\n16\n4> nope{1}\nerror: unknown operation `nope` at offset 0\n5> 2+3\n5\n6> \n";
    assert_eq!(out.stdout, want);
    let loaded = cli(&["repl", "--load", &path("programs/twice.how")], "twice{x+1}{f{1}}\n");
    assert!(loaded.stdout.contains("3\n"), "{}", loaded.stdout);
}

#[test]
fn seeded_output_is_reproducible() {
    let args = ["--seed", "7", "specialize", "twice", "--call", "f{3}", "--load"];
    let mut a = args.to_vec();
    let p = path("programs/twice_cbv.how");
    a.push(&p);
    let first = cli(&a, "");
    assert_eq!(first.code, 0, "{}", first.stderr);
    assert_eq!(first.stdout, cli(&a, "").stdout);
    assert!(first.stdout.ends_with("((3*3)*(3*3)) = 81\n"), "{}", first.stdout);
}

#[test]
fn defrule_text_form() {
    let out = cli(&["defrule", "if"], "");
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("    if OF T\n       (C:bool)\n"), "{}", out.stdout);
    assert!(out.stdout.contains("if{E⟨C⟩}{E⟨Then⟩}{E⟨Else⟩} ⟶ T_η1⟨E⟨C⟩⟩[η1/C]T_θ⟨D⟨if⟩⟩ ⊣ {\n"), "{}", out.stdout);
}
