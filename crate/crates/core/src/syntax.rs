//! Monomial notation: exponent tuples such as `(2,0,-1)` or expressions such
//! as `y/(x^2*z^3)` over the program's variable names.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::lattice::ExponentVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {column}: {message}")]
pub struct SyntaxError {
    /// 1-based character column in the input.
    pub column: usize,
    pub message: String,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Int(BigInt),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start + 1, Token::Ident(chars[start..i].iter().collect())));
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((start + 1, Token::Int(digits.parse().expect("ascii digits"))));
        } else if "()*/^,-".contains(c) {
            out.push((start + 1, Token::Sym(c)));
            i += 1;
        } else {
            return Err(SyntaxError {
                column: start + 1,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    names: &'a [String],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(format!("expected {c:?}"))
        }
    }

    fn expr(&mut self) -> Result<ExponentVector, SyntaxError> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = &acc + &self.power()?;
            } else if self.eat('/') {
                acc = &acc - &self.power()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<ExponentVector, SyntaxError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let k = if self.eat('(') {
            let k = self.integer()?;
            self.expect(')')?;
            k
        } else {
            self.integer()?
        };
        Ok(base.scaled(&k))
    }

    fn integer(&mut self) -> Result<BigInt, SyntaxError> {
        let negative = self.eat('-');
        match self.peek() {
            Some(Token::Int(k)) => {
                let k = k.clone();
                self.pos += 1;
                Ok(if negative { -k } else { k })
            }
            _ => self.error("expected an integer"),
        }
    }

    fn atom(&mut self) -> Result<ExponentVector, SyntaxError> {
        let d = self.names.len();
        match self.peek().cloned() {
            Some(Token::Ident(name)) => match self.names.iter().position(|n| *n == name) {
                Some(j) => {
                    self.pos += 1;
                    Ok(ExponentVector::unit(d, j))
                }
                None => self.error(format!("unknown variable {name:?}")),
            },
            Some(Token::Int(k)) if k.is_one() => {
                self.pos += 1;
                Ok(ExponentVector::zero(d))
            }
            Some(Token::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            _ => self.error("expected a variable, 1 or '('"),
        }
    }

    /// `(e_1, …, e_d)` when the input is a bare integer tuple.
    fn tuple(&mut self) -> Option<Result<ExponentVector, SyntaxError>> {
        let is_tuple = self.tokens.iter().all(|(_, t)| matches!(t, Token::Int(_) | Token::Sym('(' | ')' | ',' | '-')))
            && self.tokens.iter().any(|(_, t)| *t == Token::Sym(','));
        if !is_tuple {
            return None;
        }
        Some((|| {
            let parens = self.eat('(');
            let mut entries = vec![self.integer()?];
            while self.eat(',') {
                entries.push(self.integer()?);
            }
            if parens {
                self.expect(')')?;
            }
            if entries.len() != self.names.len() {
                return self.error(format!("expected {} exponents, found {}", self.names.len(), entries.len()));
            }
            Ok(ExponentVector::new(entries))
        })())
    }
}

/// Parses a monomial over `names`.
pub fn parse_monomial(text: &str, names: &[String]) -> Result<ExponentVector, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        names,
        end: text.chars().count() + 1,
    };
    if parser.tokens.is_empty() {
        return parser.error("empty monomial");
    }
    let value = match parser.tuple() {
        Some(v) => v?,
        None => parser.expr()?,
    };
    if parser.pos != parser.tokens.len() {
        return parser.error("unexpected trailing input");
    }
    Ok(value)
}

fn factors(w: &ExponentVector, names: &[String], sign: i8) -> Vec<String> {
    w.entries()
        .iter()
        .zip(names)
        .filter_map(|(e, n)| {
            let e = if sign < 0 { -e } else { e.clone() };
            if !e.is_positive() {
                None
            } else if e.is_one() {
                Some(n.clone())
            } else {
                Some(format!("{n}^{e}"))
            }
        })
        .collect()
}

/// Renders `w` as `num/den`, e.g. `y/(x^2*z^3)`; the unit monomial is `1`.
pub fn format_monomial(w: &ExponentVector, names: &[String]) -> String {
    let num = factors(w, names, 1);
    let den = factors(w, names, -1);
    let num_s = if num.is_empty() { "1".to_string() } else { num.join("*") };
    match den.len() {
        0 => num_s,
        1 => format!("{num_s}/{}", den[0]),
        _ => format!("{num_s}/({})", den.join("*")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xyz() -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }

    fn ev(v: &[i64]) -> ExponentVector {
        ExponentVector::from_i64s(v)
    }

    #[test]
    fn parses_expressions() {
        let n = xyz();
        assert_eq!(parse_monomial("y/(x^2*z^3)", &n).unwrap(), ev(&[-2, 1, -3]));
        assert_eq!(parse_monomial("x/z", &n).unwrap(), ev(&[1, 0, -1]));
        assert_eq!(parse_monomial("1", &n).unwrap(), ev(&[0, 0, 0]));
        assert_eq!(parse_monomial("1/y", &n).unwrap(), ev(&[0, -1, 0]));
        assert_eq!(parse_monomial("z*x^3/y^2", &n).unwrap(), ev(&[3, -2, 1]));
        assert_eq!(parse_monomial("x^(-2) * y", &n).unwrap(), ev(&[-2, 1, 0]));
        assert_eq!(parse_monomial("(x*y)^2", &n).unwrap(), ev(&[2, 2, 0]));
    }

    #[test]
    fn parses_tuples() {
        let n = xyz();
        assert_eq!(parse_monomial("(2,0,1)", &n).unwrap(), ev(&[2, 0, 1]));
        assert_eq!(parse_monomial("-1, 2, 0", &n).unwrap(), ev(&[-1, 2, 0]));
        assert!(parse_monomial("(1,2)", &n).is_err());
    }

    #[test]
    fn reports_errors() {
        let n = xyz();
        assert_eq!(parse_monomial("x*w", &n).unwrap_err().column, 3);
        assert!(parse_monomial("x/(y", &n).is_err());
        assert!(parse_monomial("", &n).is_err());
        assert!(parse_monomial("x y", &n).is_err());
        assert!(parse_monomial("2*x", &n).is_err());
        assert!(parse_monomial("x$", &n).is_err());
    }

    #[test]
    fn formats() {
        let n = xyz();
        assert_eq!(format_monomial(&ev(&[-2, 1, -3]), &n), "y/(x^2*z^3)");
        assert_eq!(format_monomial(&ev(&[0, 0, 0]), &n), "1");
        assert_eq!(format_monomial(&ev(&[0, -1, 0]), &n), "1/y");
        assert_eq!(format_monomial(&ev(&[1, 1, 0]), &n), "x*y");
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("x_1"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier(""));
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(v in prop::collection::vec(-20i64..=20, 3)) {
            let n = xyz();
            let w = ExponentVector::from_i64s(&v);
            prop_assert_eq!(parse_monomial(&format_monomial(&w, &n), &n).unwrap(), w);
        }
    }
}
