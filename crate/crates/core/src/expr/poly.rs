//! Sparse multivariate polynomials over the rationals in jet coordinates.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::coord::Coord;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Power product of coordinates, sorted by coordinate, exponents positive.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Monomial(SmallVec<[(Coord, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(c: Coord) -> Self {
        Monomial(smallvec::smallvec![(c, 1)])
    }

    pub fn from_powers(mut powers: Vec<(Coord, u32)>) -> Self {
        powers.retain(|(_, e)| *e > 0);
        powers.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: SmallVec<[(Coord, u32); 4]> = SmallVec::new();
        for (c, e) in powers {
            match out.last_mut() {
                Some((lc, le)) if *lc == c => *le += e,
                _ => out.push((c, e)),
            }
        }
        Monomial(out)
    }

    pub fn powers(&self) -> &[(Coord, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, c: &Coord) -> u32 {
        self.0
            .binary_search_by(|(k, _)| k.cmp(c))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: SmallVec<[(Coord, u32); 4]> =
            SmallVec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.0[i..].iter().cloned());
        out.extend(other.0[j..].iter().cloned());
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (c, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == *c {
                if other.0[j].1 > *e {
                    return None;
                }
                out.push((c.clone(), e - other.0[j].1));
                j += 1;
            } else {
                if j < other.0.len() && other.0[j].0 < *c {
                    return None;
                }
                out.push((c.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial::from_powers(out))
    }

    /// Exponent reduced by one in `c`, with the old exponent, if `c` occurs.
    pub fn differentiate(&self, c: &Coord) -> Option<(u32, Monomial)> {
        let idx = self.0.binary_search_by(|(k, _)| k.cmp(c)).ok()?;
        let e = self.0[idx].1;
        let mut out = self.0.clone();
        if e == 1 {
            out.remove(idx);
        } else {
            out[idx].1 -= 1;
        }
        Some((e, Monomial(out)))
    }

    pub fn coords(&self) -> impl Iterator<Item = &Coord> {
        self.0.iter().map(|(c, _)| c)
    }
}

/// Graded lexicographic order: earlier coordinates are more significant.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (mut i, mut j) = (0, 0);
            loop {
                match (self.0.get(i), other.0.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some((a, ea)), Some((b, eb))) => match a.cmp(b) {
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => {
                            if ea != eb {
                                return ea.cmp(eb);
                            }
                            i += 1;
                            j += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn var(c: Coord) -> Self {
        Self::term(Rational::one(), Monomial::var(c))
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| m.is_one() && c.is_one())
                .unwrap_or(false)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Number of terms; the empty case is [`Self::is_zero`].
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn coords(&self) -> Vec<Coord> {
        let mut v: Vec<Coord> = self
            .terms
            .keys()
            .flat_map(|m| m.coords().cloned())
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, k: &Rational) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(n, c)| (n.mul(m), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn partial(&self, c: &Coord) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, k) in &self.terms {
            if let Some((e, dm)) = m.differentiate(c) {
                out.add_term(dm, k * rat(e as i64));
            }
        }
        out
    }

    /// Exact quotient, or `None` if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Polynomial) -> Option<Polynomial> {
        if divisor.is_zero() {
            return None;
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (lm, lc) = divisor.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = rm.div(&lm)?;
            let qc = rc / &lc;
            rem = rem.sub(&divisor.mul_term(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Make the leading coefficient one. Returns the factor divided out.
    pub fn monic(&self) -> (Polynomial, Rational) {
        match self.leading() {
            None => (Polynomial::zero(), Rational::one()),
            Some((_, lc)) => {
                let lc = lc.clone();
                (self.scale(&lc.recip()), lc)
            }
        }
    }

    /// Greatest common divisor, normalized monic. `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() {
            return other.monic().0;
        }
        if other.is_zero() {
            return self.monic().0;
        }
        if self.as_constant().is_some() || other.as_constant().is_some() {
            return Polynomial::one();
        }
        if self == other {
            return self.monic().0;
        }
        // A variable present in only one argument can be split off: the gcd
        // divides every coefficient with respect to it.
        let (va, vb) = (self.coords(), other.coords());
        let only_a: Vec<Coord> = va.iter().filter(|c| !vb.contains(c)).cloned().collect();
        if !only_a.is_empty() {
            return gcd_with_coefficients(other, self, &only_a);
        }
        let only_b: Vec<Coord> = vb.iter().filter(|c| !va.contains(c)).cloned().collect();
        if !only_b.is_empty() {
            return gcd_with_coefficients(self, other, &only_b);
        }
        if other.div_exact(self).is_some() {
            return self.monic().0;
        }
        if self.div_exact(other).is_some() {
            return other.monic().0;
        }
        gcd_recursive(self, other).monic().0
    }

    /// Coefficients of `self` viewed as a polynomial in `vars`.
    fn coefficients_in(&self, vars: &[Coord]) -> Vec<Polynomial> {
        let mut groups: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (outer, inner): (Vec<_>, Vec<_>) = m
                .powers()
                .iter()
                .cloned()
                .partition(|(v, _)| vars.contains(v));
            groups
                .entry(Monomial::from_powers(outer))
                .or_insert_with(Polynomial::zero)
                .add_term(Monomial::from_powers(inner), c.clone());
        }
        groups.into_values().collect()
    }

    /// Integer-primitive scaling: clears denominators and divides by the
    /// content so the leading coefficient is a positive integer.
    pub fn primitive_integer(&self) -> (Polynomial, Rational) {
        if self.is_zero() {
            return (Polynomial::zero(), Rational::one());
        }
        let mut lcm = BigInt::one();
        for c in self.terms.values() {
            lcm = lcm.lcm(c.denom());
        }
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let n = (c * BigRational::from_integer(lcm.clone())).to_integer();
            g = g.gcd(&n);
        }
        let mut factor = BigRational::new(lcm, g);
        if self
            .leading()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
        {
            factor = -factor;
        }
        (self.scale(&factor), factor)
    }

    pub fn eval(&self, point: &dyn Fn(&Coord) -> Rational) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.powers() {
                let x = point(v);
                for _ in 0..*e {
                    t *= &x;
                }
            }
            acc += t;
        }
        acc
    }

    fn degree_in(&self, v: &Coord) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// Coefficients as a univariate polynomial in `v`.
    fn univariate(&self, v: &Coord) -> Vec<Polynomial> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Polynomial::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            let rest: Vec<(Coord, u32)> =
                m.powers().iter().filter(|(k, _)| k != v).cloned().collect();
            out[e as usize].add_term(Monomial::from_powers(rest), c.clone());
        }
        out
    }

    fn from_univariate(coeffs: &[Polynomial], v: &Coord) -> Polynomial {
        let mut out = Polynomial::zero();
        for (e, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let vm = Monomial::from_powers(vec![(v.clone(), e as u32)]);
            out = out.add(&c.mul_term(&vm, &Rational::one()));
        }
        out
    }
}

fn trim(p: &mut Vec<Polynomial>) {
    while p.len() > 1 && p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn content(coeffs: &[Polynomial]) -> Polynomial {
    let mut g = Polynomial::zero();
    for c in coeffs {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn primitive_part(coeffs: &[Polynomial]) -> Vec<Polynomial> {
    let c = content(coeffs);
    let parts: Vec<Polynomial> = coeffs
        .iter()
        .map(|p| p.div_exact(&c).expect("content divides"))
        .collect();
    // remove the remaining numeric content so coefficients stay small
    let mut lcm = BigInt::one();
    let mut g = BigInt::zero();
    for p in &parts {
        for (_, c) in p.terms() {
            lcm = lcm.lcm(c.denom());
        }
    }
    for p in &parts {
        for (_, c) in p.terms() {
            g = g.gcd(&(c * BigRational::from_integer(lcm.clone())).to_integer());
        }
    }
    if g.is_zero() {
        return parts;
    }
    let k = BigRational::new(lcm, g);
    parts.iter().map(|p| p.scale(&k)).collect()
}

fn pseudo_remainder(a: &[Polynomial], b: &[Polynomial]) -> Vec<Polynomial> {
    let mut r: Vec<Polynomial> = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    trim(&mut r);
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = c.mul(lb);
        }
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] = r[i + shift].sub(&bc.mul(&lr));
        }
        r.pop();
        trim(&mut r);
        if r.is_empty() {
            r.push(Polynomial::zero());
        }
    }
    r
}

/// `gcd(a, b)` where `vars` occur in `b` only.
fn gcd_with_coefficients(a: &Polynomial, b: &Polynomial, vars: &[Coord]) -> Polynomial {
    let mut g = a.monic().0;
    for c in b.coefficients_in(vars) {
        g = g.gcd(&c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn gcd_recursive(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let mut vars = a.coords();
    vars.extend(b.coords());
    vars.sort();
    vars.dedup();
    let Some(v) = vars.first().cloned() else {
        return Polynomial::one();
    };
    let (ua, ub) = (a.univariate(&v), b.univariate(&v));
    if ua.len() == 1 {
        return ua[0].gcd(&content(&ub));
    }
    if ub.len() == 1 {
        return ub[0].gcd(&content(&ua));
    }
    let g_content = content(&ua).gcd(&content(&ub));
    let mut p = primitive_part(&ua);
    let mut q = primitive_part(&ub);
    if p.len() < q.len() {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = pseudo_remainder(&p, &q);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        if r.len() == 1 {
            q = vec![Polynomial::one()];
            break;
        }
        p = q;
        q = primitive_part(&r);
    }
    Polynomial::from_univariate(&q, &v).mul(&g_content)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::coord::MultiIndex;

    fn u() -> Polynomial {
        Polynomial::var(Coord::dep(0))
    }
    fn ux() -> Polynomial {
        Polynomial::var(Coord::jet(0, MultiIndex::unit(0)))
    }
    fn x() -> Polynomial {
        Polynomial::var(Coord::indep(0))
    }

    #[test]
    fn grlex_order() {
        let m_x = Monomial::var(Coord::indep(0));
        let m_u = Monomial::var(Coord::dep(0));
        let m_uu = Monomial::from_powers(vec![(Coord::dep(0), 2)]);
        assert!(m_x > m_u);
        assert!(m_uu > m_x);
        assert!(Monomial::one() < m_u);
    }

    #[test]
    fn gcd_univariate_and_multivariate() {
        let one = Polynomial::one();
        let a = u().mul(&u()).sub(&one);
        let b = u().sub(&one);
        assert_eq!(a.gcd(&b), b);
        let f = x().add(&u());
        let g1 = f.mul(&ux().add(&one));
        let g2 = f.mul(&f).mul(&u());
        assert_eq!(g1.gcd(&g2), f.monic().0);
        assert!(u().gcd(&ux()).is_one());
    }

    #[test]
    fn gcd_against_a_power_of_one_variable() {
        let one = Polynomial::one();
        let ut = Polynomial::var(Coord::jet(0, MultiIndex::unit(1)));
        let uxt = Polynomial::var(Coord::jet(0, MultiIndex::from_counts(&[1, 1])));
        let base = ut.add(&one);
        let pow = |n: usize| (0..n).fold(one.clone(), |p, _| p.mul(&base));
        let cofactor = u().mul(&uxt).mul(&ux()).add(&ut.mul(&x())).sub(&one);
        let a = pow(2).mul(&cofactor).mul(&cofactor);
        assert_eq!(a.gcd(&pow(5)), pow(2));
        assert_eq!(pow(5).gcd(&a), pow(2));
        assert_eq!(a.gcd(&pow(2).mul(&u())), pow(2));
    }

    #[test]
    fn exact_division() {
        let one = Polynomial::one();
        let a = u().mul(&u()).sub(&one);
        let q = a.div_exact(&u().add(&one)).unwrap();
        assert_eq!(q, u().sub(&one));
        assert!(u().div_exact(&ux()).is_none());
    }

    #[test]
    fn primitive_integer_scaling() {
        let p = u().scale(&ratio(1, 3)).add(&ux().scale(&ratio(1, 2)));
        let (q, _) = p.primitive_integer();
        assert_eq!(q, u().scale(&rat(2)).add(&ux().scale(&rat(3))));
    }
}
