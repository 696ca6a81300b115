//! Interpreter and inference-rule toolkit for a signature-driven language
//! with copy-rule semantics.

pub mod syntax;
pub mod lambda;
pub mod rules;
pub mod specializer;
pub mod types;
pub mod eval;
pub mod stdlib;
pub mod session;
pub mod cli;

/// The integer type of the evaluator.
pub type Int = i64;
