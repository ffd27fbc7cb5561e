//! Mini-language for boundary functions: `z`, `w`, `zbar`, `wbar`, `conj(·)`, `abs2(·)`,
//! `+ - * ^`, parentheses and complex literals such as `0.3`, `2i`, `1.5+0.5i`.

use num_complex::Complex;

use super::BigradedPoly;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let save = i;
                i += 1;
                if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                    i += 1;
                }
                if i < bytes.len() && bytes[i].is_ascii_digit() {
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let value: f64 = src[start..i].parse().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("bad number '{}'", &src[start..i]),
            })?;
            let imaginary = i < bytes.len()
                && bytes[i] == b'i'
                && !(i + 1 < bytes.len() && bytes[i + 1].is_ascii_alphanumeric());
            if imaginary {
                i += 1;
                out.push((start, Token::Imag(value)));
            } else {
                out.push((start, Token::Num(value)));
            }
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(src[start..i].to_string())));
        } else if "+-*^()".contains(ch) {
            out.push((i, Token::Op(ch)));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character '{ch}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(self.len)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{op}'"))
        }
    }

    fn expr<T: Real>(&mut self) -> Result<BigradedPoly<T>> {
        let mut acc = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            if op == '+' {
                acc += &rhs;
            } else {
                acc -= &rhs;
            }
        }
        Ok(acc)
    }

    fn term<T: Real>(&mut self) -> Result<BigradedPoly<T>> {
        let mut acc = self.power()?;
        while self.peek() == Some(&Token::Op('*')) {
            self.pos += 1;
            let rhs = self.power()?;
            acc = acc.multiply(&rhs);
        }
        Ok(acc)
    }

    fn power<T: Real>(&mut self) -> Result<BigradedPoly<T>> {
        if self.peek() == Some(&Token::Op('-')) {
            self.pos += 1;
            return Ok(-&self.power()?);
        }
        if self.peek() == Some(&Token::Op('+')) {
            self.pos += 1;
            return self.power();
        }
        let base = self.atom()?;
        if self.peek() == Some(&Token::Op('^')) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Token::Num(e)) if e >= 0.0 && e.fract() == 0.0 && e <= 64.0 => {
                    self.pos += 1;
                    Ok(base.pow(e as u32))
                }
                _ => self.err("exponent must be a nonnegative integer literal"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom<T: Real>(&mut self) -> Result<BigradedPoly<T>> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(BigradedPoly::constant(Complex::new(T::lit(v), T::zero()))),
            Token::Imag(v) => Ok(BigradedPoly::constant(Complex::new(T::zero(), T::lit(v)))),
            Token::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Ident(name) => match name.as_str() {
                "z" => Ok(BigradedPoly::z()),
                "w" => Ok(BigradedPoly::w()),
                "zbar" => Ok(BigradedPoly::zbar()),
                "wbar" => Ok(BigradedPoly::wbar()),
                "i" => Ok(BigradedPoly::constant(Complex::new(T::zero(), T::one()))),
                "conj" | "abs2" => {
                    self.expect('(')?;
                    let inner = self.expr()?;
                    self.expect(')')?;
                    Ok(if name == "conj" {
                        inner.conjugate()
                    } else {
                        inner.abs2()
                    })
                }
                other => {
                    self.pos -= 1;
                    self.err(format!("unknown identifier '{other}'"))
                }
            },
            Token::Op(c) => {
                self.pos -= 1;
                self.err(format!("unexpected '{c}'"))
            }
        }
    }
}

/// Parses an expression into a polynomial.
pub fn parse_expression<T: Real>(src: &str) -> Result<BigradedPoly<T>> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        len: src.len(),
    };
    if tokens.is_empty() {
        return parser.err("empty expression");
    }
    let p = parser.expr()?;
    if parser.pos != tokens.len() {
        return parser.err("trailing input");
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::Monomial4;

    type P = BigradedPoly<f64>;

    #[test]
    fn basic_expressions() {
        let p: P = parse_expression("zbar*wbar").unwrap();
        assert_eq!(p, P::mono(0, 1, 0, 1));
        let q: P = parse_expression("abs2(z)").unwrap();
        assert_eq!(q, P::mono(1, 1, 0, 0));
        let r: P = parse_expression("z^2*w").unwrap();
        assert_eq!(r, P::mono(2, 0, 1, 0));
        let s: P = parse_expression("conj(z)").unwrap();
        assert_eq!(s, P::zbar());
    }

    #[test]
    fn complex_literals() {
        let p: P = parse_expression("(1.5+0.5i)*z - 2i").unwrap();
        assert_eq!(p.coefficient(&Monomial4::new(1, 0, 0, 0)), Complex::new(1.5, 0.5));
        assert_eq!(p.coefficient(&Monomial4::ONE), Complex::new(0.0, -2.0));
        let q: P = parse_expression("-z^2 + 1e-1*w").unwrap();
        assert_eq!(q.coefficient(&Monomial4::new(2, 0, 0, 0)), Complex::new(-1.0, 0.0));
        assert_eq!(q.coefficient(&Monomial4::new(0, 0, 1, 0)), Complex::new(0.1, 0.0));
    }

    #[test]
    fn parse_failures() {
        for bad in ["", "z +", "foo(z)", "z^w", "(z", "z $ w", "z w"] {
            assert!(parse_expression::<f64>(bad).is_err(), "{bad}");
        }
    }
}
