use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::coord::{Context, Coord};
use super::poly::{rat, Monomial, Polynomial, Rational};
use crate::error::{Error, Result};

/// A rational function in jet coordinates kept in canonical form: the
/// numerator and denominator are coprime and the denominator has leading
/// coefficient one.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct JetExpression {
    num: Polynomial,
    den: Polynomial,
}

impl fmt::Debug for JetExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

impl From<Polynomial> for JetExpression {
    fn from(p: Polynomial) -> Self {
        JetExpression {
            num: p,
            den: Polynomial::one(),
        }
    }
}

impl From<Rational> for JetExpression {
    fn from(c: Rational) -> Self {
        Polynomial::constant(c).into()
    }
}

impl From<i64> for JetExpression {
    fn from(c: i64) -> Self {
        rat(c).into()
    }
}

impl JetExpression {
    pub fn zero() -> Self {
        Polynomial::zero().into()
    }

    pub fn one() -> Self {
        Polynomial::one().into()
    }

    pub fn var(c: Coord) -> Self {
        Polynomial::var(c).into()
    }

    pub fn fraction(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        if let Some(c) = den.as_constant() {
            return Ok(num.scale(&c.recip()).into());
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides"),
                den.div_exact(&g).expect("gcd divides"),
            )
        };
        let (den, lc) = den.monic();
        Ok(JetExpression {
            num: num.scale(&lc.recip()),
            den,
        })
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.is_polynomial().then_some(&self.num)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn coords(&self) -> Vec<Coord> {
        let mut v = self.num.coords();
        v.extend(self.den.coords());
        v.sort();
        v.dedup();
        v
    }

    /// Highest jet order among the coordinates, 0 if none.
    pub fn jet_order(&self) -> usize {
        self.coords()
            .iter()
            .map(Coord::jet_order)
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            if self.den.is_one() {
                return self.num.add(&other.num).into();
            }
            return Self::fraction(self.num.add(&other.num), self.den.clone())
                .expect("nonzero den");
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Self::fraction(num, self.den.mul(&other.den)).expect("nonzero den")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        JetExpression {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        JetExpression {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return self.num.mul(&other.num).into();
        }
        Self::fraction(self.num.mul(&other.num), self.den.mul(&other.den)).expect("nonzero den")
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::fraction(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            Ok(JetExpression {
                num: self.num.pow(e as u32),
                den: self.den.pow(e as u32),
            })
        } else {
            Self::one().div(&self.pow(-e)?)
        }
    }

    /// Formal partial derivative treating every coordinate as independent.
    pub fn partial(&self, c: &Coord) -> Self {
        let dn = self.num.partial(c);
        if self.den.is_one() {
            return dn.into();
        }
        let dd = self.den.partial(c);
        if dd.is_zero() {
            return Self::fraction(dn, self.den.clone()).expect("nonzero den");
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        Self::fraction(num, self.den.mul(&self.den)).expect("nonzero den")
    }

    /// Simultaneous substitution of coordinates by expressions.
    pub fn substitute(&self, rules: &BTreeMap<Coord, JetExpression>) -> Result<Self> {
        if rules.is_empty() {
            return Ok(self.clone());
        }
        let mut cache: HashMap<(Coord, u32), JetExpression> = HashMap::new();
        let num = substitute_poly(&self.num, rules, &mut cache);
        if self.den.is_one() {
            return Ok(num);
        }
        let den = substitute_poly(&self.den, rules, &mut cache);
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        num.div(&den)
    }

    pub fn eval(&self, point: &dyn Fn(&Coord) -> Rational) -> Option<Rational> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(point) / d)
    }

    pub fn display<'a>(&'a self, ctx: &'a Context) -> DisplayExpr<'a> {
        DisplayExpr { e: self, ctx }
    }

    pub fn to_string_in(&self, ctx: &Context) -> String {
        self.display(ctx).to_string()
    }

    /// True when printing needs parentheses as a factor of a product.
    pub fn is_compound(&self) -> bool {
        !self.den.is_one() || self.num.len() > 1
    }
}

fn substitute_poly(
    p: &Polynomial,
    rules: &BTreeMap<Coord, JetExpression>,
    cache: &mut HashMap<(Coord, u32), JetExpression>,
) -> JetExpression {
    let mut acc = JetExpression::zero();
    for (m, c) in p.terms() {
        let mut kept = Vec::new();
        let mut factor = JetExpression::from(c.clone());
        for (v, e) in m.powers() {
            match rules.get(v) {
                Some(img) => {
                    let key = (v.clone(), *e);
                    let pw = cache
                        .entry(key)
                        .or_insert_with(|| img.pow(*e as i64).expect("non-negative power"))
                        .clone();
                    factor = factor.mul(&pw);
                }
                None => kept.push((v.clone(), *e)),
            }
        }
        if !kept.is_empty() {
            factor =
                factor.mul(&Polynomial::term(Rational::one(), Monomial::from_powers(kept)).into());
        }
        acc = acc.add(&factor);
    }
    acc
}

pub struct DisplayExpr<'a> {
    e: &'a JetExpression,
    ctx: &'a Context,
}

pub(crate) fn write_monomial(m: &Monomial, ctx: &Context) -> String {
    m.powers()
        .iter()
        .map(|(c, e)| {
            let name = ctx.coord_name(c);
            if *e == 1 {
                name
            } else {
                format!("{name}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn write_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Terms in descending monomial order, e.g. `3*u^2 + u_xx - 1/2*x`.
pub(crate) fn write_polynomial(p: &Polynomial, ctx: &Context) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&write_rational(&abs));
        } else {
            if !abs.is_one() {
                out.push_str(&write_rational(&abs));
                out.push('*');
            }
            out.push_str(&write_monomial(m, ctx));
        }
    }
    out
}

impl fmt::Display for DisplayExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = write_polynomial(&self.e.num, self.ctx);
        if self.e.den.is_one() {
            return f.write_str(&num);
        }
        let den = write_polynomial(&self.e.den, self.ctx);
        write!(f, "({num})/({den})")
    }
}
