//! Recursive-descent parser for signatures and expressions.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

/// Binding strength of infix operators, loosest first.
pub fn precedence(op: &str) -> (u8, Assoc) {
    match op {
        "<<" => (1, Assoc::Left),
        ":=" => (2, Assoc::Right),
        "=" | "<" | ">" | "<=" | ">=" | "<>" => (3, Assoc::None),
        "::" => (4, Assoc::Right),
        "+" | "-" => (5, Assoc::Left),
        "*" | "/" => (6, Assoc::Left),
        "?" => (7, Assoc::Left),
        _ => (1, Assoc::Left),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assoc {
    Left,
    Right,
    None,
}

pub const IMPLICIT_OP: &str = "?";

pub struct Parser {
    toks: Vec<Token>,
    at: usize,
    end: usize,
}

impl Parser {
    pub fn new(source: &str) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: tokenize(source)?, at: 0, end: source.len() })
    }

    pub fn from_tokens(toks: Vec<Token>, end: usize) -> Self {
        Parser { toks, at: 0, end }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.pos).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.tok.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.at >= self.toks.len()
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => SyntaxError::Unexpected { pos: self.pos(), found: t.to_string(), expected: expected.to_string() },
            None => SyntaxError::UnexpectedEof { pos: self.end, expected: expected.to_string() },
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&tok) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn expect_name(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Name(n)) => {
                let n = n.clone();
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    // ---- signatures -------------------------------------------------------

    pub fn signature(&mut self) -> Result<Signature, SyntaxError> {
        self.basic_signature(false)
    }

    fn type_params(&mut self) -> Result<Vec<TypeParam>, SyntaxError> {
        let mut out = Vec::new();
        if self.peek() != Some(&Tok::Name("OF".into())) {
            return Ok(out);
        }
        self.bump();
        loop {
            let arity = match self.peek() {
                Some(Tok::Int(n)) => {
                    let n = *n;
                    self.bump();
                    Some(u32::try_from(n).map_err(|_| self.unexpected("type operator arity"))?)
                }
                _ => None,
            };
            let name = self.expect_name("type parameter name")?;
            out.push(TypeParam { arity, name });
            if self.peek() == Some(&Tok::Comma) && matches!(self.peek_at(1), Some(Tok::Name(_)) | Some(Tok::Int(_))) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn type_expr(&mut self) -> Result<TypeExpr, SyntaxError> {
        let mut names = Vec::new();
        while let Some(Tok::Name(n)) = self.peek() {
            names.push(n.clone());
            self.bump();
        }
        if names.is_empty() {
            return Err(self.unexpected("type expression"));
        }
        Ok(TypeExpr(names))
    }

    /// `nested` signatures (inside brackets) also accept braces as brackets.
    fn basic_signature(&mut self, nested: bool) -> Result<Signature, SyntaxError> {
        let start = self.pos();
        let name = self.expect_name("signature name")?;
        let type_params = self.type_params()?;
        let mut params: Vec<ParamSpec> = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::LBracket) => {
                    self.bump();
                    params.push(self.bracketed_param()?);
                    self.expect(Tok::RBracket, "`]`")?;
                }
                Some(Tok::LBrace) if nested => {
                    self.bump();
                    params.push(self.bracketed_param()?);
                    self.expect(Tok::RBrace, "`}`")?;
                }
                Some(Tok::LParen) => {
                    self.bump();
                    loop {
                        params.push(self.value_param()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                }
                _ => break,
            }
        }
        let result = if self.peek() == Some(&Tok::Colon) {
            self.bump();
            Some(self.type_expr()?)
        } else {
            None
        };
        let mut seen = std::collections::HashSet::new();
        for p in &params {
            // operator members may be overloaded on operand types
            let key = match p {
                ParamSpec::Operator(o) => format!("{} ({}, {})", o.symbol, o.lhs, o.rhs),
                _ => p.name().to_string(),
            };
            if !seen.insert(key) {
                return Err(SyntaxError::DuplicateParamName { pos: start, name: p.name().to_string() });
            }
        }
        Ok(Signature { name, type_params, params, result })
    }

    fn bracketed_param(&mut self) -> Result<ParamSpec, SyntaxError> {
        if let Some(Tok::Op(_)) = self.peek() {
            return Ok(ParamSpec::Operator(self.operator_signature(false)?));
        }
        Ok(ParamSpec::ByName(self.basic_signature(true)?))
    }

    fn value_param(&mut self) -> Result<ParamSpec, SyntaxError> {
        if let Some(Tok::Op(_)) = self.peek() {
            return Ok(ParamSpec::Operator(self.operator_signature(true)?));
        }
        let pos = self.pos();
        let sig = self.basic_signature(true)?;
        if sig.result.is_none() {
            return Err(SyntaxError::MissingValueType { pos, name: sig.name });
        }
        Ok(ParamSpec::ByValue(sig))
    }

    fn operator_signature(&mut self, by_value: bool) -> Result<OperatorSig, SyntaxError> {
        let symbol = match self.bump() {
            Some(Tok::Op(o)) => o,
            _ => unreachable!("caller checked for an operator token"),
        };
        let type_params = self.type_params()?;
        self.expect(Tok::LParen, "`(` after operator symbol")?;
        let lhs = self.type_expr()?;
        self.expect(Tok::Comma, "`,` between operand types")?;
        let rhs = self.type_expr()?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Colon, "`:` before operator result type")?;
        let result = self.type_expr()?;
        Ok(OperatorSig { symbol, type_params, lhs, rhs, result, by_value })
    }

    // ---- expressions ------------------------------------------------------

    /// Members separated by `;` up to (not including) a closing token or EOF.
    pub fn members(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None | Some(Tok::RBrace) => break,
                Some(Tok::Semi) => {
                    self.bump();
                    continue;
                }
                _ => {}
            }
            out.push(self.expr()?);
            match self.peek() {
                Some(Tok::Semi) => {
                    self.bump();
                }
                None | Some(Tok::RBrace) => break,
                _ => return Err(self.unexpected("`;` or `}`")),
            }
        }
        Ok(out)
    }

    fn braced_members(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        let open = self.pos();
        self.expect(Tok::LBrace, "`{`")?;
        let ms = self.members()?;
        match self.peek() {
            Some(Tok::RBrace) => {
                self.bump();
                Ok(ms)
            }
            None => Err(SyntaxError::UnbalancedBrace { pos: open }),
            _ => Err(self.unexpected("`}`")),
        }
    }

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(1)
    }

    fn binary(&mut self, min: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.juxtaposed()?;
        while let Some(Tok::Op(o)) = self.peek() {
            let op = o.clone();
            let (prec, assoc) = precedence(&op);
            if prec < min {
                break;
            }
            let span = Span(self.pos());
            self.bump();
            let next = match assoc {
                Assoc::Left | Assoc::None => prec + 1,
                Assoc::Right => prec,
            };
            let rhs = self.binary(next)?;
            lhs = Expr::Infix { op, owner: None, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
            if assoc == Assoc::None {
                if let Some(Tok::Op(o)) = self.peek() {
                    if precedence(o).0 == prec {
                        return Err(self.unexpected("no chained comparison"));
                    }
                }
            }
        }
        Ok(lhs)
    }

    /// Primaries separated by nothing get the implicit `?` between them.
    fn juxtaposed(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.primary()?;
        while self.starts_primary() {
            let span = Span(self.pos());
            let rhs = self.primary()?;
            lhs = Expr::Infix { op: IMPLICIT_OP.into(), owner: None, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
        Ok(lhs)
    }

    fn starts_primary(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Name(_)) | Some(Tok::Int(_)) | Some(Tok::Str(_)) | Some(Tok::Tilde) | Some(Tok::LBracket) | Some(Tok::LParen) | Some(Tok::LBrace)
        )
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Some(Tok::Op(o)) if o == "-" && matches!(self.peek_at(1), Some(Tok::Int(_))) => {
                self.bump();
                match self.bump() {
                    Some(Tok::Int(v)) => Ok(Expr::Int(-v)),
                    _ => unreachable!(),
                }
            }
            Some(Tok::Str(s)) => {
                self.bump();
                Ok(Expr::Str(s))
            }
            Some(Tok::Tilde) => {
                self.bump();
                match self.bump() {
                    Some(Tok::Str(s)) => Ok(Expr::Str(s)),
                    _ => {
                        self.at -= 1;
                        Err(self.unexpected("string after `~`"))
                    }
                }
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::LBracket) => {
                self.bump();
                let mut items = Vec::new();
                if self.peek() != Some(&Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Expr::List(items))
            }
            Some(Tok::LBrace) => Ok(Expr::Block(self.braced_members()?)),
            Some(Tok::Name(n)) if n == "DEF" => self.def(),
            Some(Tok::Name(_)) => self.application(),
            _ => Err(self.unexpected("expression")),
        }
    }

    fn def(&mut self) -> Result<Expr, SyntaxError> {
        let span = Span(self.pos());
        self.bump();
        let sig = self.signature()?;
        let body = Expr::seq(self.braced_members()?);
        let app = if self.peek() == Some(&Tok::LBrace) {
            Some(Box::new(Expr::seq(self.braced_members()?)))
        } else {
            None
        };
        Ok(Expr::Def { sig, body: Box::new(body), app, span })
    }

    fn ends_member(tok: Option<&Tok>) -> bool {
        matches!(tok, None | Some(Tok::Semi) | Some(Tok::RBrace) | Some(Tok::RParen) | Some(Tok::Comma))
    }

    fn application(&mut self) -> Result<Expr, SyntaxError> {
        let span = Span(self.pos());
        let first = self.expect_name("operation name")?;
        let (qualifier, op) = if self.peek() == Some(&Tok::Dot) {
            self.bump();
            (Some(first), self.expect_name("member name")?)
        } else {
            (None, first)
        };
        let mut args = Vec::new();
        let mut decl_label = None;
        loop {
            let label = match (self.peek(), self.peek_at(1), self.peek_at(2)) {
                (Some(Tok::Name(n)), Some(Tok::Colon), Some(Tok::LBrace | Tok::LParen)) => {
                    let n = n.clone();
                    self.bump();
                    self.bump();
                    Some(n)
                }
                (Some(Tok::Name(n)), Some(Tok::LBrace | Tok::LParen), _) if n != "DEF" => {
                    let n = n.clone();
                    self.bump();
                    Some(n)
                }
                (Some(Tok::Name(n)), next, _) if Self::ends_member(next) && n != "DEF" => {
                    decl_label = Some(n.clone());
                    self.bump();
                    break;
                }
                _ => None,
            };
            match self.peek() {
                Some(Tok::LBrace) => {
                    let body = Expr::seq(self.braced_members()?);
                    args.push(Arg { label, body, passing: Passing::Braces });
                }
                Some(Tok::LParen) => {
                    self.bump();
                    let mut label = label;
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            let body = self.expr()?;
                            args.push(Arg { label: label.take(), body, passing: Passing::Values });
                            if self.peek() == Some(&Tok::Comma) {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                }
                _ => {
                    debug_assert!(label.is_none());
                    break;
                }
            }
        }
        Ok(Expr::Apply(Apply { op, qualifier, args, decl_label, span }))
    }
}

/// Parse a whole source text as a `;`-separated member list.
pub fn parse_program(source: &str) -> Result<Vec<Expr>, SyntaxError> {
    let mut p = Parser::new(source)?;
    let ms = p.members()?;
    if !p.at_end() {
        return Err(SyntaxError::UnbalancedBrace { pos: p.pos() });
    }
    Ok(ms)
}

pub fn parse_expression(source: &str) -> Result<Expr, SyntaxError> {
    Ok(Expr::seq(parse_program(source)?))
}

pub fn parse_signature(source: &str) -> Result<Signature, SyntaxError> {
    let mut p = Parser::new(source)?;
    let sig = p.signature()?;
    if !p.at_end() {
        return Err(p.unexpected("end of signature"));
    }
    Ok(sig)
}

/// A standalone operator signature such as `:: OF T (T, T List): T List`.
pub fn parse_operator_signature(source: &str) -> Result<OperatorSig, SyntaxError> {
    let mut p = Parser::new(source)?;
    if !matches!(p.peek(), Some(Tok::Op(_))) {
        return Err(p.unexpected("operator symbol"));
    }
    let sig = p.operator_signature(false)?;
    if !p.at_end() {
        return Err(p.unexpected("end of signature"));
    }
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn braced(e: Expr) -> Arg {
        Arg::braced(e)
    }

    #[test]
    fn twice_signature() {
        let s = parse_signature("twice OF W [F[x:int]:int] [Return[f[X:int]:int] :W]:W").unwrap();
        assert_eq!(s.name, "twice");
        assert_eq!(s.type_params, vec![TypeParam { arity: None, name: "W".into() }]);
        assert_eq!(s.result, Some(TypeExpr::named("W")));
        let names: Vec<_> = s.param_names().collect();
        assert_eq!(names, ["F", "Return"]);
        let f = s.params[0].signature().unwrap();
        assert!(matches!(s.params[0], ParamSpec::ByName(_)));
        assert_eq!(f.params[0].name(), "x");
        assert_eq!(f.params[0].signature().unwrap().result, Some(TypeExpr::named("int")));
        let ret = s.params[1].signature().unwrap();
        assert_eq!(ret.result, Some(TypeExpr::named("W")));
        assert_eq!(ret.params[0].signature().unwrap().params[0].name(), "X");
    }

    #[test]
    fn nullary_signature() {
        assert_eq!(parse_signature("f").unwrap(), Signature::nullary("f"));
    }

    #[test]
    fn value_lists_and_operators() {
        let s = parse_signature("with OF T,W (X:T) [Body(__:T):W] : W").unwrap();
        assert!(matches!(&s.params[0], ParamSpec::ByValue(v) if v.name == "X"));
        assert!(matches!(&s.params[1], ParamSpec::ByName(b) if b.params[0].is_by_value()));

        let v = parse_signature("var OF w, rvalue [Scope OF lvalue (__:lvalue) [_:rvalue] [:=(lvalue,rvalue) : rvalue]:w]:w").unwrap();
        let scope = v.params[0].signature().unwrap();
        assert_eq!(scope.type_params[0].name, "lvalue");
        match &scope.params[2] {
            ParamSpec::Operator(o) => {
                assert_eq!(o.symbol, ":=");
                assert_eq!(o.lhs, TypeExpr::named("lvalue"));
                assert_eq!(o.result, TypeExpr::named("rvalue"));
            }
            other => panic!("expected operator, got {other:?}"),
        }
    }

    #[test]
    fn arity_numerals_and_postfix_types() {
        let s = parse_signature("pairs OF 2 Pair, T [mk[a:T][b:T]:T T Pair]:string Array").unwrap();
        assert_eq!(s.type_params[0], TypeParam { arity: Some(2), name: "Pair".into() });
        assert_eq!(s.result, Some(TypeExpr(vec!["string".into(), "Array".into()])));
    }

    #[test]
    fn signature_errors() {
        assert!(matches!(parse_signature("f [a][a]"), Err(SyntaxError::DuplicateParamName { .. })));
        assert!(matches!(parse_signature("f (a)"), Err(SyntaxError::MissingValueType { .. })));
        assert!(parse_signature("f [a").is_err());
    }

    #[test]
    fn section_three_application() {
        let e = parse_expression("r{x*x}{f{3}}").unwrap();
        assert_eq!(
            e,
            Expr::Apply(Apply::new(
                "r",
                vec![
                    braced(Expr::infix("*", Expr::name("x"), Expr::name("x"))),
                    braced(Expr::apply("f", vec![Expr::Int(3)])),
                ]
            ))
        );
    }

    #[test]
    fn block_with_three_members() {
        match parse_expression("{var t; t:=0; f{2}}").unwrap() {
            Expr::Block(ms) => {
                assert_eq!(ms.len(), 3);
                assert!(matches!(&ms[0], Expr::Apply(a) if a.op == "var" && a.decl_label.as_deref() == Some("t")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn list_literal() {
        assert_eq!(
            parse_expression("[3,5,7]").unwrap(),
            Expr::List(vec![Expr::Int(3), Expr::Int(5), Expr::Int(7)])
        );
    }

    #[test]
    fn labels_and_value_lists() {
        let e = parse_expression("induction(n) i:{if(i=0,0,(2*i-1)+result(i-1))}").unwrap();
        let Expr::Apply(a) = e else { panic!() };
        assert_eq!(a.args.len(), 2);
        assert_eq!(a.args[0].passing, Passing::Values);
        assert_eq!(a.args[1].label.as_deref(), Some("i"));
        let e = parse_expression("induction{[3,5,7]} L: { split_list{L}{1}{hd*result{tl}} }").unwrap();
        let Expr::Apply(a) = e else { panic!() };
        assert_eq!(a.args[1].label.as_deref(), Some("L"));
    }

    #[test]
    fn precedence_of_output_and_assignment() {
        let e = parse_expression(r#"stdout << ~"Step " << t:=t+1 << nl"#).unwrap();
        // ((stdout << "Step ") << (t := t+1)) << nl
        let Expr::Infix { op, lhs, rhs, .. } = e else { panic!() };
        assert_eq!(op, "<<");
        assert_eq!(*rhs, Expr::name("nl"));
        let Expr::Infix { rhs: mid, .. } = *lhs else { panic!() };
        assert!(matches!(*mid, Expr::Infix { ref op, .. } if op == ":="));
    }

    #[test]
    fn implicit_operator_inserted() {
        let e = parse_expression("a 3").unwrap();
        assert_eq!(e, Expr::infix("?", Expr::name("a"), Expr::Int(3)));
    }

    #[test]
    fn declaration_forms() {
        let ms = parse_program("DEF twice [F[x:int]:int] [Return[f[X:int]:int]:int]:int { Return{F{F{X}}} }; twice{x*x}; f{2}").unwrap();
        assert_eq!(ms.len(), 3);
        assert!(matches!(&ms[0], Expr::Def { app: None, .. }));
        let ms = parse_program("with(X) u; F{F{u}}").unwrap();
        assert!(matches!(&ms[0], Expr::Apply(a) if a.decl_label.as_deref() == Some("u") && a.args.len() == 1));
    }

    #[test]
    fn unbalanced() {
        assert!(matches!(parse_program("f{1"), Err(SyntaxError::UnbalancedBrace { .. })));
        assert!(matches!(parse_program("f{1}}"), Err(SyntaxError::UnbalancedBrace { .. })));
    }
}
