//! Recursive-descent parser for jet expressions.
//!
//! ```text
//! expr       := term (('+'|'-') term)*
//! term       := unary (('*'|'/') unary)*
//! unary      := '-' unary | factor
//! factor     := base ('^' '-'? integer)?
//! base       := integer | identifier | derivative | generator | dop | '(' expr ')'
//! derivative := identifier '_' (letter+ | '{' letter+ '}')
//! generator  := ('d' | 'dv') '[' slot (',' slot)* ']' (identifier | derivative)
//! dop        := 'D' letter+            (operator mode only)
//! ```

use num_bigint::BigInt;

use super::coord::{Context, Coord, MultiIndex};
use super::jet::JetExpression;
use super::poly::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Number(BigInt),
    Coord(Coord),
    /// `d[K]x` (vertical = false) or `dv[K]u_sigma` (vertical = true).
    Generator {
        vertical: bool,
        slots: Vec<usize>,
        coord: Coord,
    },
    TotalD(MultiIndex),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize),
    Neg(Box<Ast>),
    Pow(Box<Ast>, i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Scalar,
    Form,
    Operator,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a Context,
    mode: Mode,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{}`", ch as char))
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?), at);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Ast> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            self.skip_ws();
            let digits = self.digits();
            if digits.is_empty() {
                return self.err("expected integer exponent");
            }
            let e: i64 = match digits.parse() {
                Ok(e) => e,
                Err(_) => return self.err("exponent too large"),
            };
            return Ok(Ast::Pow(Box::new(base), if neg { -e } else { e }));
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn letters(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn base(&mut self) -> Result<Ast> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits();
                Ok(Ast::Number(d.parse().expect("digits")))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                if (name == "d" || name == "dv") && self.src.get(self.pos) == Some(&b'[') {
                    if self.mode == Mode::Scalar {
                        self.pos = start;
                        return self
                            .err("differential generators are not allowed in a scalar expression");
                    }
                    return self.generator(name == "dv");
                }
                if self.mode == Mode::Operator && name.starts_with('D') && name.len() > 1 {
                    if let Some(sigma) = self.ctx.parse_letters(&name[1..]) {
                        if self.ctx.indep_index(&name).is_none()
                            && self.ctx.dep_index(&name).is_none()
                        {
                            return Ok(Ast::TotalD(sigma));
                        }
                    }
                }
                self.coordinate(name, start).map(Ast::Coord)
            }
            Some(c) => self.err(format!("unexpected character `{}`", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn coordinate(&mut self, name: String, start: usize) -> Result<Coord> {
        let suffix = if self.src.get(self.pos) == Some(&b'_') {
            self.pos += 1;
            let letters = if self.src.get(self.pos) == Some(&b'{') {
                self.pos += 1;
                let l = self.letters();
                if self.src.get(self.pos) != Some(&b'}') {
                    return self.err("expected `}`");
                }
                self.pos += 1;
                l
            } else {
                self.letters()
            };
            if letters.is_empty() {
                return self.err("expected derivative letters after `_`");
            }
            Some(letters)
        } else {
            None
        };
        if let Some(mu) = self.ctx.indep_index(&name) {
            if suffix.is_some() {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("independent variable `{name}` cannot carry derivatives"),
                });
            }
            return Ok(Coord::indep(mu));
        }
        let Some(j) = self.ctx.dep_index(&name) else {
            return Err(Error::UnknownIdentifier { name, pos: start });
        };
        let sigma = match suffix {
            None => MultiIndex::empty(),
            Some(l) => match self.ctx.parse_letters(&l) {
                Some(s) => s,
                None => {
                    return Err(Error::UnknownIdentifier {
                        name: format!("{name}_{l}"),
                        pos: start,
                    })
                }
            },
        };
        Ok(Coord::jet(j, sigma))
    }

    fn generator(&mut self, vertical: bool) -> Result<Ast> {
        self.expect(b'[')?;
        let mut slots = Vec::new();
        loop {
            self.skip_ws();
            let d = self.digits();
            if d.is_empty() {
                return self.err("expected slot number");
            }
            let s: usize = d.parse().map_err(|_| Error::Syntax {
                pos: self.pos,
                msg: "bad slot".into(),
            })?;
            if s == 0 {
                return self.err("slots are numbered from 1");
            }
            slots.push(s);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                _ => return self.err("expected `,` or `]`"),
            }
        }
        let start = self.pos;
        let name = self.ident();
        if name.is_empty() {
            return self.err("expected coordinate after generator slots");
        }
        let coord = self.coordinate(name, start)?;
        match (&coord, vertical) {
            (Coord::Indep(_), true) => Err(Error::Syntax {
                pos: start,
                msg: "vertical generators take a jet coordinate".into(),
            }),
            (Coord::Jet(..), false) => Err(Error::Syntax {
                pos: start,
                msg: "full differentials of jet coordinates are expanded; use dv[..] generators"
                    .into(),
            }),
            _ => Ok(Ast::Generator {
                vertical,
                slots,
                coord,
            }),
        }
    }
}

pub fn parse_ast(text: &str, ctx: &Context, mode: Mode) -> Result<Ast> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        ctx,
        mode,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

fn eval_scalar(ast: &Ast) -> Result<JetExpression> {
    Ok(match ast {
        Ast::Number(n) => Rational::from_integer(n.clone()).into(),
        Ast::Coord(c) => JetExpression::var(c.clone()),
        Ast::Generator { .. } | Ast::TotalD(_) => {
            return Err(Error::Syntax {
                pos: 0,
                msg: "not a scalar expression".into(),
            })
        }
        Ast::Add(a, b) => eval_scalar(a)?.add(&eval_scalar(b)?),
        Ast::Sub(a, b) => eval_scalar(a)?.sub(&eval_scalar(b)?),
        Ast::Mul(a, b) => eval_scalar(a)?.mul(&eval_scalar(b)?),
        Ast::Div(a, b, _) => eval_scalar(a)?.div(&eval_scalar(b)?)?,
        Ast::Neg(a) => eval_scalar(a)?.neg(),
        Ast::Pow(a, e) => eval_scalar(a)?.pow(*e)?,
    })
}

/// Parse a scalar jet expression into canonical form.
pub fn parse_expression(text: &str, ctx: &Context) -> Result<JetExpression> {
    eval_scalar(&parse_ast(text, ctx, Mode::Scalar)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context::new(&["x", "t"], &["u", "v"]).unwrap()
    }

    #[test]
    fn parses_kdv_rhs() {
        let c = ctx();
        let e = parse_expression("6*u*u_x + u_{xxx}", &c).unwrap();
        assert_eq!(e.numerator().len(), 2);
        assert_eq!(e.to_string_in(&c), "6*u*u_x + u_xxx");
    }

    #[test]
    fn cancellation_and_gcd() {
        let c = ctx();
        assert!(parse_expression("u - u", &c).unwrap().is_zero());
        assert_eq!(
            parse_expression("(u^2 - 1)/(u - 1)", &c).unwrap(),
            parse_expression("u + 1", &c).unwrap()
        );
    }

    #[test]
    fn errors() {
        let c = ctx();
        assert!(matches!(
            parse_expression("u + w", &c),
            Err(Error::UnknownIdentifier { pos: 4, .. })
        ));
        assert!(matches!(
            parse_expression("u + ", &c),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("u/(u-u)", &c),
            Err(Error::DivisionByZero)
        ));
        assert!(matches!(
            parse_expression("x_t", &c),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("u_q", &c),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_expression("dv[1]u", &c),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn print_parse_roundtrip() {
        let c = ctx();
        for s in [
            "-1/2*u_x^2 + x*t",
            "(u + 1)/(u^2 + v)",
            "-u",
            "3/7",
            "u_xxt*v_t - 2",
        ] {
            let e = parse_expression(s, &c).unwrap();
            let printed = e.to_string_in(&c);
            assert_eq!(
                parse_expression(&printed, &c).unwrap(),
                e,
                "{s} -> {printed}"
            );
        }
    }

    #[test]
    fn whitespace_and_negative_powers() {
        let c = ctx();
        let a = parse_expression(" u ^ -1 * u ", &c).unwrap();
        assert!(a.is_one());
    }
}
