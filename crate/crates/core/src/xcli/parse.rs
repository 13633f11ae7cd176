//! Recursive-descent parser for the LE-function grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | factor
//! factor := atom ('^' rational)?
//! atom   := 't' | number | '(' expr ')' | 'log' '(' expr ')'
//!         | 'exp' '(' expr ')' | 'sqrt' '(' expr ')'
//! rational := integer ('/' positive-integer)?   (optionally parenthesised)
//! number := decimal literal | 'pi' | 'e' | 'sqrt2'
//! ```
//! Unary minus is accepted in addition to the binary grammar.

use std::fmt;

use num::{BigInt, BigRational, Zero};

use crate::lefun::expr::{Expr, LEFunction};
use crate::lefun::num::{Named, Num};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at byte {}: expected one of {{{}}}, found {}",
            self.offset,
            self.expected.join(", "),
            self.found
        )
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn err(offset: usize, expected: &[&str], found: String) -> ParseError {
    ParseError { offset, expected: expected.iter().map(|s| s.to_string()).collect(), found }
}

const ATOM_START: &[&str] = &["t", "number", "pi", "e", "sqrt2", "(", "log", "exp", "sqrt", "-"];

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn found(&mut self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(c) => format!("{c:?}"),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            let f = self.found();
            Err(err(self.pos, &[&c.to_string()], f))
        }
    }

    fn ident(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if len == 0 || !rest.as_bytes()[0].is_ascii_alphabetic() {
            return None;
        }
        self.pos += len;
        Some((start, &rest[..len]))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = Expr::add(acc, self.term()?);
            } else if self.eat('-') {
                acc = Expr::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = Expr::mul(acc, self.unary()?);
            } else if self.eat('/') {
                acc = Expr::div(acc, self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let r = self.rational()?;
            return Ok(Expr::Pow(Box::new(base), r));
        }
        Ok(base)
    }

    fn integer(&mut self, allow_sign: bool) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let neg = allow_sign && self.eat('-');
        self.skip_ws();
        let ds = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if ds == self.pos {
            let f = self.found();
            self.pos = start;
            return Err(err(ds, &["integer"], f));
        }
        let v: BigInt = self.src[ds..self.pos].parse().expect("digits");
        Ok(if neg { -v } else { v })
    }

    fn rational(&mut self) -> Result<BigRational, ParseError> {
        let paren = self.eat('(');
        let n = self.integer(true)?;
        // `t^2/t` divides by t; only a digit after '/' continues the exponent.
        let slash_digit = self.peek() == Some('/')
            && self.src[self.pos + 1..].trim_start().starts_with(|c: char| c.is_ascii_digit());
        let d = if (paren || slash_digit) && self.eat('/') {
            let at = self.pos;
            let d = self.integer(false)?;
            if d.is_zero() {
                return Err(err(at, &["positive-integer"], "0".into()));
            }
            d
        } else {
            BigInt::from(1)
        };
        if paren {
            self.expect(')')?;
        }
        Ok(BigRational::new(n, d))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        // Scientific exponent only when a digit follows, so `2e` stays `2*e`-free.
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let v = Num::parse_decimal(&text.replace('+', ""))
            .ok_or_else(|| err(start, &["number"], format!("{text:?}")))?;
        self.pos = i;
        Ok(Expr::Const(v))
    }

    fn call(&mut self, f: fn(Expr) -> Expr) -> Result<Expr, ParseError> {
        self.expect('(')?;
        let inner = self.expr()?;
        self.expect(')')?;
        Ok(f(inner))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let (start, name) = self.ident().expect("alphabetic start");
                match name {
                    "t" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(Num::named(Named::Pi))),
                    "e" => Ok(Expr::Const(Num::named(Named::E))),
                    "sqrt2" => Ok(Expr::Const(Num::named(Named::Sqrt2))),
                    "log" => self.call(Expr::log),
                    "exp" => self.call(Expr::exp),
                    "sqrt" => self.call(|e| Expr::pow(e, 1, 2)),
                    other => Err(err(start, ATOM_START, format!("{other:?}"))),
                }
            }
            _ => {
                let f = self.found();
                Err(err(self.pos, ATOM_START, f))
            }
        }
    }
}

/// Parses the raw tree without simplification.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        let f = p.found();
        return Err(err(p.pos, &["+", "-", "*", "/", "^", "end of input"], f));
    }
    Ok(e)
}

/// Parses, simplifies and infers the domain floor.
pub fn parse_lefun(text: &str) -> Result<LEFunction, ParseError> {
    let e = parse_expr(text)?;
    LEFunction::new(e).map_err(|le| ParseError {
        offset: 0,
        expected: vec!["an expression defined on a tail [t0, ∞)".into()],
        found: le.to_string(),
    })
}

/// Text form that parses back to the same simplified tree.
pub fn print_lefun(f: &LEFunction) -> String {
    f.expr.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_carry_offset_and_expectations() {
        let e = parse_expr("t + * 2").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.expected.contains(&"t".to_string()));
        let e = parse_expr("log(t").unwrap_err();
        assert_eq!(e.offset, 5);
        assert_eq!(e.expected, vec![")".to_string()]);
        let e = parse_expr("t^x").unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse_expr("foo(t)").unwrap_err();
        assert_eq!(e.offset, 0);
    }

    #[test]
    fn log_cubed_sum() {
        let f = parse_lefun("t*log(t) + log(t)^3").unwrap();
        let g = parse_lefun("log(t)^3 + log(t)*t").unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn decimal_and_scientific_literals() {
        let f = parse_expr("1.5e2*t").unwrap().simplify();
        assert_eq!(f, parse_expr("150*t").unwrap().simplify());
        let g = parse_expr("2*e").unwrap();
        assert!(matches!(g, Expr::Mul(..)));
    }

    #[test]
    fn round_trip_on_corpus() {
        for s in [
            "t^(3/2)",
            "t*log(t) + log(t)^3",
            "exp(sqrt(log(t)))",
            "t^sqrt2",
            "exp(sqrt2*log(t))/log(t)^2",
            "sqrt2*t^2",
            "t^2 + log(log(t))",
            "log(t^2 + 1)",
            "sqrt(t^2 + t) - t",
            "-t^(1/3) + 2.25*t",
            "t/log(t)",
            "exp(-log(t)^(1/2))",
        ] {
            let Ok(e) = parse_lefun(s) else {
                // `t^sqrt2` is outside the grammar (exponents are rational).
                assert_eq!(s, "t^sqrt2");
                continue;
            };
            let printed = print_lefun(&e);
            let back = parse_lefun(&printed).unwrap();
            assert_eq!(back, e, "{s} -> {printed}");
        }
    }
}
