//! Small expression language for entering classes on a space from the
//! command line or a scenario file.
//!
//! Grammar: `+`, `-` (binary and unary), `*`, `^` with unsigned integer
//! exponents, parentheses, integer literals, and names. A name resolves
//! to a generator of the target space first and to a supplied scalar
//! parameter second. `/` is restricted to division by a nonzero scalar,
//! which is what makes `1/2` a rational literal and rules out division
//! by classes. Errors carry the byte offset they were raised at.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::Error;
use crate::rational::Rat;
use crate::ring::{GradedClass, Space};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn err(position: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        position,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, Error> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let lit = &src[start..i];
                let value = Rat::from_str(lit)
                    .map_err(|_| err(start, format!("bad integer literal `{lit}`")))?;
                out.push((start, Tok::Num(value)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            other => return Err(err(i, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    space: &'a Space,
    params: &'a BTreeMap<String, Rat>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<GradedClass, Error> {
        let mut acc = self.term()?;
        while let Some((_, tok)) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.next();
                    acc = acc.add(&self.term()?)?;
                }
                Tok::Minus => {
                    self.next();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<GradedClass, Error> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some((_, Tok::Star)) => {
                    self.next();
                    acc = acc.mul(&self.factor()?)?;
                }
                Some(&(at, Tok::Slash)) => {
                    self.next();
                    let divisor = self.factor()?;
                    let scalar = divisor.scalar_part();
                    if !divisor.is_homogeneous(0) || scalar.is_zero() {
                        return Err(err(at, "division requires a nonzero scalar divisor"));
                    }
                    acc = acc.scale(&scalar.recip().expect("checked nonzero"));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<GradedClass, Error> {
        if let Some((_, Tok::Minus)) = self.peek() {
            self.next();
            return Ok(self.factor()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<GradedClass, Error> {
        let base = self.atom()?;
        if let Some((_, Tok::Caret)) = self.peek() {
            self.next();
            let at = self.here();
            match self.next() {
                Some((_, Tok::Num(n))) => {
                    let exp = n
                        .to_i64()
                        .filter(|v| (0..=u32::MAX as i64).contains(v))
                        .ok_or_else(|| err(at, "exponent out of range"))?;
                    return base.pow(exp as u32);
                }
                _ => return Err(err(at, "expected an unsigned integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<GradedClass, Error> {
        let at = self.here();
        match self.next() {
            Some((_, Tok::Num(n))) => Ok(GradedClass::constant(self.space, n)),
            Some((_, Tok::Ident(name))) => {
                if self.space.gen_index(&name).is_some() {
                    GradedClass::generator(self.space, &name)
                } else if let Some(value) = self.params.get(&name) {
                    Ok(GradedClass::constant(self.space, value.clone()))
                } else {
                    Err(err(at, format!("unknown name `{name}`")))
                }
            }
            Some((_, Tok::LParen)) => {
                let inner = self.expr()?;
                match self.next() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    other => Err(err(
                        other.map(|(p, _)| p).unwrap_or(self.end),
                        "expected `)`",
                    )),
                }
            }
            Some((p, tok)) => Err(err(p, format!("unexpected token {tok:?}"))),
            None => Err(err(self.end, "unexpected end of expression")),
        }
    }
}

/// Parses `src` into a class on `space`. Bare names resolve to
/// generators first, then to entries of `params`.
pub fn parse_expression(
    src: &str,
    space: &Space,
    params: &BTreeMap<String, Rat>,
) -> Result<GradedClass, Error> {
    let toks = tokenize(src)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: src.len(),
        space,
        params,
    };
    let value = parser.expr()?;
    if let Some((p, tok)) = parser.peek() {
        return Err(err(*p, format!("trailing input starting at {tok:?}")));
    }
    Ok(value)
}
