use std::io::{IsTerminal, Write};
use std::process::ExitCode;

use clap::Parser;
use howard::cli::{execute, Cli, Io};
use howard::eval::Stdin;

const STACK: usize = 512 << 20;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let worker = std::thread::Builder::new().stack_size(STACK).spawn(move || {
        let io = Io { input: Box::new(Stdin), sink: Some(Box::new(std::io::stdout())), echo: !std::io::stdin().is_terminal() };
        execute(&cli, io)
    });
    let outcome = worker.expect("spawn interpreter thread").join().expect("interpreter thread");
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}
