use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::expr::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let end = t.0 == Tok::End;
            out.push(t);
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(|b| *b == b'.') {
                return Err(Error::Syntax {
                    pos: self.pos,
                    msg: "decimal literals are not allowed; write a rational such as 1/2".into(),
                });
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((Tok::Num(text.parse().unwrap()), start));
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((Tok::Ident(text.to_string()), start));
        }
        self.pos += 1;
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => return Err(Error::Syntax { pos: start, msg: format!("unexpected character `{}`", c as char) }),
        };
        Ok((tok, start))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.bump() {
            (Tok::RParen, _) => Ok(()),
            (_, pos) => Err(Error::Syntax { pos, msg: "expected `)`".into() }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = Expr::sum(vec![acc, self.term()?]);
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = Expr::product(vec![acc, self.unary()?]);
                }
                Tok::Op('/') => {
                    self.bump();
                    acc = Expr::quot(acc, self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            let inner = self.unary()?;
            return Ok(match inner.as_const() {
                Some(c) => Expr::constant(-c.clone()),
                None => Expr::neg(inner),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let exp = self.unary()?;
        let n = exp
            .as_const()
            .filter(|c| c.is_integer())
            .and_then(|c| c.to_integer().to_i64())
            .ok_or(Error::NonIntegerExponent { pos })?;
        Ok(Expr::pow(base, n))
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.bump() {
            (Tok::Num(n), _) => Ok(Expr::constant(BigRational::from_integer(n))),
            (Tok::Ident(name), pos) => {
                if *self.peek() == Tok::LParen {
                    let f = Func::from_name(&name).ok_or(Error::UnknownFunction { name: name.clone(), pos })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::func(f, arg));
                }
                Ok(Expr::var(canonical_name(&name)))
            }
            (Tok::LParen, _) => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            (Tok::End, pos) => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            (t, pos) => Err(Error::Syntax { pos, msg: format!("unexpected token {t:?}") }),
        }
    }
}

/// `x0` names the same variable as `x`.
pub fn canonical_name(name: &str) -> &str {
    if name == "x0" {
        "x"
    } else {
        name
    }
}

/// Parses an expression under the toolkit grammar.
pub fn parse(text: &str) -> Result<Expr> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() }),
    }
}

/// True when `name` is a syntactically valid identifier.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && Func::from_name(name).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_cases() {
        assert_eq!(parse("lam^2").unwrap(), Expr::pow(Expr::var("lam"), 2));
        assert_eq!(parse("y + lam^2").unwrap(), Expr::sum(vec![Expr::var("y"), Expr::pow(Expr::var("lam"), 2)]));
        assert_eq!(parse("sqrt(w)").unwrap(), Expr::sqrt(Expr::var("w")));
        assert_eq!(parse("1/2").unwrap(), Expr::rational(1, 2));
    }

    #[test]
    fn precedence() {
        let x = Expr::var("x");
        assert_eq!(parse("-x^2").unwrap(), Expr::neg(Expr::pow(x.clone(), 2)));
        assert_eq!(parse("2^3^2").unwrap(), Expr::int(512));
        assert_eq!(parse("x^-1").unwrap(), Expr::pow(x.clone(), -1));
        assert_eq!(parse("x0").unwrap(), x);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse("x +* y"), Err(Error::Syntax { pos: 3, msg: "unexpected token Op('*')".into() }));
        assert!(matches!(parse("tan(x)"), Err(Error::UnknownFunction { pos: 0, .. })));
        assert!(matches!(parse("x^(1/2)"), Err(Error::NonIntegerExponent { pos: 2 })));
        assert!(matches!(parse("x^y"), Err(Error::NonIntegerExponent { .. })));
        assert!(matches!(parse("(x"), Err(Error::Syntax { .. })));
    }
}
