//! Lexing, parsing, printing and desugaring of source programs.

pub mod ast;
pub mod desugar;
pub mod lexer;
pub mod parser;
pub mod print;

use thiserror::Error;

pub use ast::*;
pub use desugar::{desugar, desugar_members, Entry, SigEnv};
pub use parser::{parse_expression, parse_operator_signature, parse_program, parse_signature};
pub use print::{dump, print_expr, print_members, print_signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("unterminated string starting at offset {pos}")]
    UnterminatedString { pos: usize },
    #[error("illegal character {ch:?} at offset {pos}")]
    IllegalCharacter { pos: usize, ch: char },
    #[error("integer literal {text} at offset {pos} does not fit in 64 bits")]
    IntegerTooLarge { pos: usize, text: String },
    #[error("unexpected {found} at offset {pos}, expected {expected}")]
    Unexpected { pos: usize, found: String, expected: String },
    #[error("unexpected end of input at offset {pos}, expected {expected}")]
    UnexpectedEof { pos: usize, expected: String },
    #[error("unbalanced brace at offset {pos}")]
    UnbalancedBrace { pos: usize },
    #[error("duplicate parameter name `{name}` at offset {pos}")]
    DuplicateParamName { pos: usize, name: String },
    #[error("by-value parameter `{name}` at offset {pos} needs a type")]
    MissingValueType { pos: usize, name: String },
}

impl SyntaxError {
    pub fn pos(&self) -> usize {
        match self {
            SyntaxError::UnterminatedString { pos }
            | SyntaxError::IllegalCharacter { pos, .. }
            | SyntaxError::IntegerTooLarge { pos, .. }
            | SyntaxError::Unexpected { pos, .. }
            | SyntaxError::UnexpectedEof { pos, .. }
            | SyntaxError::UnbalancedBrace { pos }
            | SyntaxError::DuplicateParamName { pos, .. }
            | SyntaxError::MissingValueType { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesugarError {
    #[error("unknown operation `{name}` at offset {pos}")]
    UnknownOperation { pos: usize, name: String },
    #[error("`{name}` at offset {pos} takes {expected} argument(s), got {found}")]
    ArityMismatch { pos: usize, name: String, expected: usize, found: usize },
    #[error("declaration at offset {pos} is the last member of its brace")]
    AmbiguousDeclaration { pos: usize },
    #[error("label `{label}` at offset {pos} names another parameter; expected `{expected}`")]
    LabelMismatch { pos: usize, label: String, expected: String },
    #[error("`{name}` at offset {pos} is not a level name")]
    NotALevel { pos: usize, name: String },
    #[error("level `{level}` has no member `{member}` (offset {pos})")]
    UnknownMember { pos: usize, level: String, member: String },
    #[error("tree is not in core form")]
    NotCore,
}

/// Whether `source` is a finished unit of input: brackets balanced and
/// either ending in `;` or parsing as a whole.
pub fn input_complete(source: &str) -> bool {
    let toks = match lexer::tokenize(source) {
        Ok(t) => t,
        Err(SyntaxError::UnterminatedString { .. }) => return false,
        Err(_) => return true,
    };
    let mut depth = 0i64;
    for t in &toks {
        match t.tok {
            lexer::Tok::LBrace | lexer::Tok::LBracket | lexer::Tok::LParen => depth += 1,
            lexer::Tok::RBrace | lexer::Tok::RBracket | lexer::Tok::RParen => depth -= 1,
            _ => {}
        }
    }
    if depth > 0 {
        return false;
    }
    if matches!(toks.last(), Some(t) if t.tok == lexer::Tok::Semi) {
        return true;
    }
    !matches!(parse_program(source), Err(SyntaxError::UnexpectedEof { .. }))
}
