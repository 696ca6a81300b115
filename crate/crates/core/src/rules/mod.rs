//! Inference rules from signatures and equational reasoning with them.

pub mod engine;
pub mod math;
pub mod render;
pub mod rule;

use thiserror::Error;

pub use engine::{Closure, Engine, Env, MChain, MStep, Program};
pub use math::{MathError, MathExpr, Scalar};
pub use render::{render, Format};
pub use rule::{instantiate, Binding, Chain, Ctx, Fragment, Pattern, Rule, RuleFactory, Step, Unknown};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("no rule or axiom applies to `{program}`")]
    Stuck { program: String },
    #[error("no axiom applies to `{program}`")]
    NoAxiomApplies { program: String },
    #[error("empty program under {var}, which occurs free in the operand")]
    AnnihilateViolation { var: String },
    #[error("unknown {owner} is a {expected:?}-context fragment, got a {found:?}-context value")]
    ContextMismatch { owner: String, expected: Ctx, found: Ctx },
    #[error("no result within {fuel} steps")]
    FuelExhausted { fuel: u64 },
    #[error("defining-context reference survives specialisation: {reference}")]
    NonEliminable { reference: String },
    #[error(transparent)]
    Math(#[from] MathError),
}
