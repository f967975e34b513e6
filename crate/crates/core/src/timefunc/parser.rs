//! Recursive-descent parser for the time-function grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' int)?
//! base   := number | 't' | ident | func '(' expr ')' | '(' expr ')' | '-' base
//! func   := sin | cos | exp | sqrt
//! ```
//!
//! Note that `-` binds tighter than `^`, so `-t^2` is `(-t)^2`.

use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Expr, Func};

/// Recursion guard so adversarial inputs cannot overflow the stack.
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SyntaxError {
    /// Byte offset into the source where the problem was detected.
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at byte {}: expected {}, found {}",
            self.offset,
            self.expected.join(" | "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(u32),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Int(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, offset: usize, expected: &[&str], found: String) -> SyntaxError {
        SyntaxError {
            offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    /// Returns the next token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize), SyntaxError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::Eof, start));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start).map(|t| (t, start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(self.err(start, &["number", "identifier", "operator", "`(`"], format!("`{ch}`")))
    }

    fn number(&mut self, start: usize) -> Result<Tok, SyntaxError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            let s = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - s
        };
        let int_digits = digits(&mut self.pos);
        let mut is_int = true;
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            is_int = false;
            self.pos += 1;
            let frac_digits = digits(&mut self.pos);
            if int_digits == 0 && frac_digits == 0 {
                return Err(self.err(start, &["digit"], "`.`".into()));
            }
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            is_int = false;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            if digits(&mut self.pos) == 0 {
                let found = self.src[self.pos..]
                    .chars()
                    .next()
                    .map_or("end of input".to_string(), |c| format!("`{c}`"));
                return Err(self.err(self.pos, &["exponent digits"], found));
            }
        }
        let text = &self.src[start..self.pos];
        if is_int {
            if let Ok(v) = text.parse::<u32>() {
                return Ok(Tok::Int(v));
            }
        }
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Tok::Num(v)),
            _ => Err(self.err(start, &["finite number"], format!("`{text}`"))),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_start: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, SyntaxError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, tok_start) = lexer.next()?;
        Ok(Self {
            lexer,
            tok,
            tok_start,
            depth: 0,
        })
    }

    fn bump(&mut self) -> Result<Tok, SyntaxError> {
        let (next, start) = self.lexer.next()?;
        self.tok_start = start;
        Ok(std::mem::replace(&mut self.tok, next))
    }

    fn unexpected(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            offset: self.tok_start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.tok.describe(),
        }
    }

    fn enter(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(SyntaxError {
                offset: self.tok_start,
                expected: vec![format!("nesting depth <= {MAX_DEPTH}")],
                found: "deeper nesting".into(),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump()?;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.base()?;
        if self.tok != Tok::Caret {
            return Ok(base);
        }
        self.bump()?;
        match self.tok {
            Tok::Int(k) => {
                self.bump()?;
                Ok(Expr::Pow(Box::new(base), k))
            }
            _ => Err(self.unexpected(&["non-negative integer exponent"])),
        }
    }

    fn base(&mut self) -> Result<Expr, SyntaxError> {
        const EXPECTED: &[&str] = &["number", "`t`", "identifier", "function call", "`(`", "`-`"];
        let start = self.tok_start;
        match self.bump()? {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Int(v) => Ok(Expr::Num(v as f64)),
            Tok::Minus => {
                self.enter()?;
                let inner = self.base()?;
                self.depth -= 1;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if name == "t" {
                    return Ok(Expr::Time);
                }
                if let Some(func) = Func::from_name(&name) {
                    if self.tok != Tok::LParen {
                        return Err(self.unexpected(&["`(` after function name"]));
                    }
                    self.bump()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                Ok(Expr::Param(name))
            }
            other => Err(SyntaxError {
                offset: start,
                expected: EXPECTED.iter().map(|s| s.to_string()).collect(),
                found: other.describe(),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), SyntaxError> {
        if self.tok == Tok::RParen {
            self.bump()?;
            Ok(())
        } else {
            Err(self.unexpected(&["`)`", "operator"]))
        }
    }
}

/// Parses a time-function expression.
pub fn parse(source: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    if p.tok != Tok::Eof {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}
