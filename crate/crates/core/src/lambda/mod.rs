//! The pure by-name fragment as lambda calculus: the reference semantics.

pub mod term;
pub mod translate;

use thiserror::Error;

pub use term::{alpha_eq, normalize, substitute, NameSupply, Term, DEFAULT_FUEL};
pub use translate::translate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LambdaError {
    #[error("not in the pure fragment: {what}")]
    Unsupported { what: String },
    #[error("unbound name `{name}`")]
    UnboundName { name: String },
    #[error("no normal form within {fuel} steps")]
    FuelExhausted { fuel: u64 },
    #[error("integer overflow in {lhs} {op} {rhs}")]
    Overflow { op: String, lhs: i64, rhs: i64 },
    #[error("division by zero")]
    DivisionByZero,
}
