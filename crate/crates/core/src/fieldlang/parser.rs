//! Recursive-descent parser for field expressions.
//!
//! Precedence, lowest to highest: `+ -`, `* /`, unary `-`, `^`, atoms.
//! Exponents must be non-negative integer literals and juxtaposition is
//! rejected (`2x` is an error, write `2*x`).

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::ast::{BinOp, FieldExpr, Func, Var};

const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("syntax error at byte {offset}: expected {}, found {found}", .expected.join(" | "))]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v, _) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Slash => write!(f, "'/'"),
            Tok::Caret => write!(f, "'^'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match ch {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                let mut integral = true;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    integral = false;
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        integral = false;
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let lexeme = &text[i..j];
                let value: f64 = lexeme.parse().map_err(|_| SyntaxError {
                    offset: start,
                    expected: vec!["number".into()],
                    found: format!("'{lexeme}'"),
                })?;
                i = j;
                out.push((start, Tok::Num(value, integral)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push((start, Tok::Ident(text[i..j].to_string())));
                i = j;
                continue;
            }
            _ => {
                let found = text[i..].chars().next().map(|c| format!("'{c}'")).unwrap_or_default();
                return Err(SyntaxError {
                    offset: start,
                    expected: vec!["operator".into(), "operand".into()],
                    found,
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn expr(&mut self) -> Result<FieldExpr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = FieldExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<FieldExpr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = FieldExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<FieldExpr, SyntaxError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(FieldExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<FieldExpr, SyntaxError> {
        let mut base = self.atom()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            match self.peek().clone() {
                Tok::Num(v, true) if v <= MAX_EXPONENT as f64 => {
                    self.bump();
                    base = FieldExpr::Pow(Box::new(base), v as u32);
                }
                _ => return Err(self.error(&["non-negative integer exponent"])),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<FieldExpr, SyntaxError> {
        const OPERAND: &[&str] = &["number", "identifier", "'('", "'-'"];
        match self.peek().clone() {
            Tok::Num(v, _) => {
                self.bump();
                Ok(FieldExpr::Real(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["')'", "operator"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.bump();
                    if *self.peek() != Tok::LParen {
                        return Err(self.error(&["'('"]));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return Err(self.error(&["')'", "operator"]));
                    }
                    self.bump();
                    return Ok(FieldExpr::Call(f, Box::new(arg)));
                }
                self.bump();
                if name == "i" {
                    Ok(FieldExpr::ImagUnit)
                } else if let Some(v) = Var::from_name(&name) {
                    Ok(FieldExpr::Var(v))
                } else {
                    Ok(FieldExpr::Param(name))
                }
            }
            _ => Err(self.error(OPERAND)),
        }
    }
}

/// Parses a field expression.
pub fn parse_field(text: &str) -> Result<FieldExpr, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"]));
    }
    Ok(e)
}
