//! Recursive-descent parser for `.imnet` program source.
//!
//! The concrete grammar ships in `docs/language.md`. A program is a list of
//! `;`-terminated query definitions, the literal `>>`, then one or more
//! `;`-terminated statements. Lambdas are written `\t -> expr`.

use std::fmt;

use thiserror::Error;

use crate::model::{HeaderField, Value, ValueSet};
use crate::syntax::ast::*;
use crate::syntax::lexer::{is_reserved, tokenize, Spanned, Token};
use crate::syntax::values;

/// Parse failure with source position and the token set that was expected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at {}:{}: expected {}, found {}",
            self.line,
            self.col,
            self.expected.join(" or "),
            self.found
        )
    }
}

/// Token cursor shared by the program parser and the value parser.
pub(crate) struct Cursor {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor { tokens: tokenize(src)?, pos: 0 })
    }

    pub(crate) fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    pub(crate) fn peek_at(&self, offset: usize) -> &Token {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].token
    }

    pub(crate) fn bump(&mut self) -> Token {
        let token = self.tokens[self.pos].token.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Token::Eof
    }

    pub(crate) fn error(&self, expected: impl IntoIterator<Item = impl Into<String>>) -> ParseError {
        let here = &self.tokens[self.pos];
        ParseError {
            line: here.line,
            col: here.col,
            expected: expected.into_iter().map(Into::into).collect(),
            found: here.token.describe(),
        }
    }

    pub(crate) fn expect(&mut self, token: Token) -> Result<(), ParseError> {
        if *self.peek() == token {
            self.bump();
            Ok(())
        } else {
            Err(self.error([token.describe()]))
        }
    }

    /// Consumes an identifier usable as a variable name.
    pub(crate) fn variable(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Token::Ident(name) if !is_reserved(name) => {
                let name = name.clone();
                self.bump();
                Ok(name)
            }
            Token::Ident(name) => {
                Err(self.error([format!("a variable name (`{name}` is reserved)")]))
            }
            _ => Err(self.error(["a variable name"])),
        }
    }

    pub(crate) fn nat(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Token::Nat(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(["a number"])),
        }
    }

}

/// Parses a complete program.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut defs = Vec::new();
    while *cur.peek() != Token::DefSep {
        if cur.at_eof() {
            return Err(cur.error(["`>>`"]));
        }
        let var = cur.variable().map_err(|mut e| {
            e.expected.push("`>>`".to_string());
            e
        })?;
        cur.expect(Token::Assign)?;
        let query = match cur.peek() {
            Token::Ident(name) if !is_reserved(name) || QueryName::from_name(name).is_builtin() => {
                let q = QueryName::from_name(name);
                cur.bump();
                q
            }
            // a transformer here means the statement body started without `>>`
            _ => return Err(cur.error(["a query name", "`>>` before the statement body"])),
        };
        cur.expect(Token::Semi)?;
        defs.push((var, query));
    }
    cur.expect(Token::DefSep)?;

    let mut stmts = Vec::new();
    loop {
        stmts.push(parse_stmt(&mut cur)?);
        cur.expect(Token::Semi)?;
        if cur.at_eof() {
            break;
        }
    }
    Ok(Program { defs, body: Stmt::seq_all(stmts) })
}

/// Parses a single expression; used by tests and the language reference.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut cur = Cursor::new(src)?;
    let expr = expr(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error(["end of input"]));
    }
    Ok(expr)
}

fn parse_stmt(cur: &mut Cursor) -> Result<Stmt, ParseError> {
    match cur.peek() {
        Token::Ident(name) if name == "AddRules" => {
            cur.bump();
            cur.expect(Token::LParen)?;
            let var = cur.variable()?;
            cur.expect(Token::RParen)?;
            Ok(Stmt::AddRules(var))
        }
        Token::Ident(name) if name == "Register" => {
            cur.bump();
            Ok(Stmt::Register)
        }
        Token::Ident(name) if name == "Send" => {
            cur.bump();
            cur.expect(Token::LParen)?;
            let var = cur.variable()?;
            cur.expect(Token::RParen)?;
            Ok(Stmt::Send(var))
        }
        Token::Ident(_) => {
            let var = cur.variable()?;
            cur.expect(Token::Assign)?;
            let et = parse_transformer(cur)?;
            Ok(Stmt::Assign(var, et))
        }
        _ => Err(cur.error(["a statement"])),
    }
}

fn parse_transformer(cur: &mut Cursor) -> Result<EventTransformer, ParseError> {
    let name = match cur.peek() {
        Token::Ident(name) => name.clone(),
        _ => return Err(cur.error(["an event transformer"])),
    };
    match name.as_str() {
        "Lift" | "ApplyLft" | "ApplyRit" | "Filter" => {
            cur.bump();
            cur.expect(Token::LParen)?;
            let var = cur.variable()?;
            cur.expect(Token::Comma)?;
            let lambda = parse_lambda(cur)?;
            cur.expect(Token::RParen)?;
            Ok(match name.as_str() {
                "Lift" => EventTransformer::Lift(var, lambda),
                "ApplyLft" => EventTransformer::ApplyLft(var, lambda),
                "ApplyRit" => EventTransformer::ApplyRit(var, lambda),
                _ => EventTransformer::Filter(var, lambda),
            })
        }
        "Merge" => {
            cur.bump();
            cur.expect(Token::LParen)?;
            let x1 = cur.variable()?;
            cur.expect(Token::Comma)?;
            let x2 = cur.variable()?;
            cur.expect(Token::RParen)?;
            Ok(EventTransformer::Merge(x1, x2))
        }
        "MixFst" | "MixSnd" => {
            cur.bump();
            cur.expect(Token::LParen)?;
            // the accumulator set literal may be omitted and defaults to {}
            let set = if *cur.peek() == Token::LBrace {
                let set = values::parse_set_literal(cur)?;
                cur.expect(Token::Comma)?;
                set
            } else {
                ValueSet::empty()
            };
            let x1 = cur.variable()?;
            cur.expect(Token::Comma)?;
            let x2 = cur.variable()?;
            cur.expect(Token::RParen)?;
            Ok(if name == "MixFst" {
                EventTransformer::MixFst(set, x1, x2)
            } else {
                EventTransformer::MixSnd(set, x1, x2)
            })
        }
        "Once" => {
            cur.bump();
            cur.expect(Token::LParen)?;
            let var = cur.variable()?;
            cur.expect(Token::Comma)?;
            let n = cur.nat()?;
            cur.expect(Token::RParen)?;
            Ok(EventTransformer::Once(var, n))
        }
        "MakForwRule" | "MakeRule" => {
            cur.bump();
            cur.expect(Token::LParen)?;
            let var = cur.variable()?;
            cur.expect(Token::RParen)?;
            Ok(if name == "MakForwRule" {
                EventTransformer::MakForwRule(var)
            } else {
                EventTransformer::MakeRule(var)
            })
        }
        _ => Err(cur.error(["an event transformer"])),
    }
}

fn parse_lambda(cur: &mut Cursor) -> Result<Lambda, ParseError> {
    cur.expect(Token::Lambda)?;
    let param = cur.variable()?;
    cur.expect(Token::Arrow)?;
    let body = expr(cur)?;
    Ok(Lambda { param, body })
}

fn expr(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let lhs = arith(cur)?;
    let op = match cur.peek() {
        Token::EqEq => CmpOp::Eq,
        Token::Ne => CmpOp::Ne,
        Token::Lt => CmpOp::Lt,
        Token::Le => CmpOp::Le,
        _ => return Ok(lhs),
    };
    cur.bump();
    let rhs = arith(cur)?;
    Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)))
}

fn arith(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let mut lhs = postfix(cur)?;
    loop {
        let op = match cur.peek() {
            Token::Plus => ArithOp::Add,
            Token::Minus => ArithOp::Sub,
            _ => return Ok(lhs),
        };
        cur.bump();
        let rhs = postfix(cur)?;
        lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
    }
}

fn postfix(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let mut base = atom(cur)?;
    while *cur.peek() == Token::Dot {
        cur.bump();
        let index = cur.nat()?;
        base = Expr::Proj(index as usize, Box::new(base));
    }
    Ok(base)
}

fn atom(cur: &mut Cursor) -> Result<Expr, ParseError> {
    match cur.peek().clone() {
        Token::Nat(n) => {
            cur.bump();
            Ok(Expr::Const(Value::Nat(n)))
        }
        Token::Ip(ip) => {
            cur.bump();
            Ok(Expr::Const(Value::Ip(ip)))
        }
        Token::LParen => {
            cur.bump();
            let first = expr_or_wildcard(cur)?;
            if *cur.peek() == Token::RParen {
                cur.bump();
                // plain grouping; a bare `_` is not an expression
                return match first {
                    WildOr::Wild => Err(cur.error(["an expression (wildcards only appear in triples)"])),
                    WildOr::Expr(e) => Ok(e),
                };
            }
            let mut items = vec![first];
            while *cur.peek() == Token::Comma {
                cur.bump();
                items.push(expr_or_wildcard(cur)?);
            }
            cur.expect(Token::RParen)?;
            let arity = items.len();
            let exprs = items
                .into_iter()
                .enumerate()
                .map(|(i, item)| match item {
                    WildOr::Expr(e) => Ok(e),
                    WildOr::Wild if arity == 3 && i == 2 => Ok(Expr::Const(Value::Wildcard)),
                    WildOr::Wild => Err(cur.error([
                        "`_` only as the third component of a rule-construction triple",
                    ])),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Expr::Tuple(exprs))
        }
        Token::LBrace => {
            let value = values::parse_brace_value(cur)?;
            Ok(Expr::Const(value))
        }
        Token::Ident(word) => match word.as_str() {
            "true" => {
                cur.bump();
                Ok(Expr::Const(Value::Bool(true)))
            }
            "false" => {
                cur.bump();
                Ok(Expr::Const(Value::Bool(false)))
            }
            "sendall" | "sendcontroller" | "sendout" | "change" => {
                let value = values::parse_action_value(cur)?;
                Ok(Expr::Const(value))
            }
            "any" => {
                cur.bump();
                Ok(Expr::Const(Value::Pattern(crate::model::Pattern::any())))
            }
            "pk" => {
                let value = values::packet_value(cur)?;
                Ok(Expr::Const(value))
            }
            "switch" => {
                cur.bump();
                cur.expect(Token::LParen)?;
                let arg = expr(cur)?;
                cur.expect(Token::Comma)?;
                let ids = cur.variable()?;
                cur.expect(Token::RParen)?;
                Ok(Expr::Builtin(Builtin::Switch, vec![arg, Expr::Var(ids)]))
            }
            "port" | "srcip" | "dstip" | "srcport" | "dstport" | "inport" => {
                let builtin = match word.as_str() {
                    "port" => Builtin::Port,
                    "srcip" => Builtin::SrcIp,
                    "dstip" => Builtin::DstIp,
                    "srcport" => Builtin::SrcPort,
                    "dstport" => Builtin::DstPort,
                    _ => Builtin::InPort,
                };
                cur.bump();
                cur.expect(Token::LParen)?;
                // `port(2)` with a bare number is the port-value literal;
                // the builtin takes a host reference
                if builtin == Builtin::Port
                    && matches!(cur.peek(), Token::Nat(_))
                    && *cur.peek_at(1) == Token::RParen
                {
                    let n = cur.nat()?;
                    cur.bump();
                    return Ok(Expr::Const(Value::Port(n)));
                }
                let arg = expr(cur)?;
                cur.expect(Token::RParen)?;
                Ok(Expr::Builtin(builtin, vec![arg]))
            }
            _ if is_reserved(&word) => Err(cur.error(["an expression"])),
            _ => {
                cur.bump();
                Ok(Expr::Var(word))
            }
        },
        _ => Err(cur.error(["an expression"])),
    }
}

enum WildOr {
    Expr(Expr),
    Wild,
}

fn expr_or_wildcard(cur: &mut Cursor) -> Result<WildOr, ParseError> {
    if *cur.peek() == Token::Underscore {
        cur.bump();
        Ok(WildOr::Wild)
    } else {
        Ok(WildOr::Expr(expr(cur)?))
    }
}

/// Consumes a header-field name (`srcip`, `dstport`, ...).
pub(crate) fn header_field(cur: &mut Cursor) -> Result<HeaderField, ParseError> {
    match cur.peek() {
        Token::Ident(name) => match HeaderField::from_name(name) {
            Some(field) => {
                cur.bump();
                Ok(field)
            }
            None => Err(cur.error(["a header field name"])),
        },
        _ => Err(cur.error(["a header field name"])),
    }
}

/// Static well-formedness beyond the grammar: definition variables must be
/// distinct.
pub fn validate_program(program: &Program) -> Result<(), ParseError> {
    let mut seen = std::collections::BTreeSet::new();
    for (var, _) in &program.defs {
        if !seen.insert(var.clone()) {
            return Err(ParseError {
                line: 0,
                col: 0,
                expected: vec![format!("distinct definition variables (`{var}` repeats)")],
                found: format!("duplicate definition of `{var}`"),
            });
        }
    }
    Ok(())
}
